#include "citysense/ingest.hpp"

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "citysense/geo.hpp"
#include "citysense/timeutil.hpp"

namespace citysense {

using nlohmann::json;

const std::vector<RawReading>* MeasurementBatch::find(const std::string& sensor_id,
                                                      const std::string& stressor_name) const {
    const auto it = groups.find({sensor_id, stressor_name});
    return it == groups.end() ? nullptr : &it->second;
}

std::string record_kind_name(RecordKind kind) {
    switch (kind) {
        case RecordKind::forecast: return "forecast";
        case RecordKind::band: return "band";
        case RecordKind::value_map: return "value_map";
        case RecordKind::reliability_map: return "reliability_map";
    }
    return "?";
}

std::optional<RecordKind> record_kind_from_name(const std::string& name) {
    if (name == "forecast") return RecordKind::forecast;
    if (name == "band") return RecordKind::band;
    if (name == "value_map") return RecordKind::value_map;
    if (name == "reliability_map") return RecordKind::reliability_map;
    return std::nullopt;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double_field(const std::string& s, const char* what, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(std::string("line ") + std::to_string(line_no) + ": bad " + what +
                    " '" + s + "'");
    }
}

}  // namespace

std::vector<SensorMeta> load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open network file: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw Error("network file is empty: " + path.string());
    ++line_no;
    if (line == "sensor_id,latitude,longitude,elevation\r") line.pop_back();
    if (line != "sensor_id,latitude,longitude,elevation") {
        throw Error("line 1: bad network header, expected "
                    "'sensor_id,latitude,longitude,elevation'");
    }
    std::vector<SensorMeta> sensors;
    std::map<std::string, std::size_t> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 4) {
            throw Error("line " + std::to_string(line_no) + ": expected 4 fields");
        }
        SensorMeta m;
        m.sensor_id = f[0];
        if (m.sensor_id.empty()) {
            throw Error("line " + std::to_string(line_no) + ": empty sensor_id");
        }
        if (const auto it = seen.find(m.sensor_id); it != seen.end()) {
            throw Error("line " + std::to_string(line_no) + ": duplicate sensor_id '" +
                        m.sensor_id + "' (first on line " + std::to_string(it->second) + ")");
        }
        m.latitude = parse_double_field(f[1], "latitude", line_no);
        m.longitude = parse_double_field(f[2], "longitude", line_no);
        m.elevation = parse_double_field(f[3], "elevation", line_no);
        seen.emplace(m.sensor_id, line_no);
        sensors.push_back(std::move(m));
    }
    return sensors;
}

void write_network_csv(std::span<const SensorMeta> sensors,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write network file: " + path.string());
    out << "sensor_id,latitude,longitude,elevation\n";
    for (const SensorMeta& m : sensors) {
        out << m.sensor_id << "," << format_coord(m.latitude) << ","
            << format_coord(m.longitude) << "," << format_coord(m.elevation) << "\n";
    }
}

MeasurementBatch load_readings(const std::filesystem::path& path, const Interval& interval) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open readings file: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw Error("readings file is empty: " + path.string());
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "sensor_id,stressor,timestamp,value,unit") {
        throw Error("line 1: bad readings header, expected "
                    "'sensor_id,stressor,timestamp,value,unit'");
    }

    MeasurementBatch batch;
    batch.covered = interval;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        if (f.size() != 5) {
            throw Error("line " + std::to_string(line_no) + ": expected 5 fields");
        }
        RawReading r;
        r.sensor_id = f[0];
        r.stressor = Stressor::from_name(f[1], f[4]);
        const auto ts = parse_iso8601(f[2]);
        if (!ts) {
            throw Error("line " + std::to_string(line_no) + ": bad timestamp '" + f[2] + "'");
        }
        r.timestamp = *ts;
        r.value = parse_double_field(f[3], "value", line_no);
        if (!interval.contains(r.timestamp)) {
            ++batch.dropped_out_of_interval;
            continue;
        }
        batch.groups[{r.sensor_id, r.stressor.name}].push_back(std::move(r));
    }

    for (auto& [key, readings] : batch.groups) {
        std::stable_sort(readings.begin(), readings.end(),
                         [](const RawReading& a, const RawReading& b) {
                             return a.timestamp < b.timestamp;
                         });
        auto last = std::unique(readings.begin(), readings.end(),
                                [](const RawReading& a, const RawReading& b) {
                                    return a.timestamp == b.timestamp;
                                });
        batch.duplicates_collapsed +=
            static_cast<std::size_t>(readings.end() - last);
        readings.erase(last, readings.end());
    }
    return batch;
}

void write_readings_csv(const MeasurementBatch& batch, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write readings file: " + path.string());
    out << "sensor_id,stressor,timestamp,value,unit\n";
    for (const auto& [key, readings] : batch.groups) {
        for (const RawReading& r : readings) {
            out << r.sensor_id << "," << r.stressor.name << ","
                << format_iso8601(r.timestamp) << "," << format_coord(r.value) << ","
                << r.stressor.unit << "\n";
        }
    }
}

namespace {

json record_to_json(const AnalyticalRecord& r) {
    json j;
    j["kind"] = record_kind_name(r.kind);
    j["stressor"] = r.stressor;
    j["produced_at"] = format_iso8601(r.produced_at);
    if (!r.sensor_id.empty()) j["sensor_id"] = r.sensor_id;
    if (r.kind == RecordKind::band) j["confidence_level"] = r.confidence_level;
    if (!r.method.empty()) j["method"] = r.method;
    j["wkt"] = r.wkt;
    return j;
}

AnalyticalRecord record_from_json(const json& j) {
    AnalyticalRecord r;
    const auto kind = record_kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw Error("store: unknown record kind");
    r.kind = *kind;
    r.stressor = j.at("stressor").get<std::string>();
    const auto ts = parse_iso8601(j.at("produced_at").get<std::string>());
    if (!ts) throw Error("store: bad produced_at");
    r.produced_at = *ts;
    r.sensor_id = j.value("sensor_id", "");
    r.confidence_level = j.value("confidence_level", 0.0);
    r.method = j.value("method", "");
    r.wkt = j.at("wkt").get<std::string>();
    return r;
}

struct LockedFd {
    int fd = -1;
    ~LockedFd() {
        if (fd >= 0) {
            ::flock(fd, LOCK_UN);
            ::close(fd);
        }
    }
};

std::filesystem::path index_path_for(const std::filesystem::path& store) {
    std::filesystem::path p = store;
    p += ".idx";
    return p;
}

}  // namespace

std::size_t store_records(std::span<const AnalyticalRecord> records,
                          const std::filesystem::path& store_path) {
    for (const AnalyticalRecord& r : records) {
        if (!validate_wkt(r.wkt)) {
            throw Error("store_records: invalid WKT in a " + record_kind_name(r.kind) +
                        " record");
        }
    }
    if (records.empty()) return 0;

    LockedFd lock;
    lock.fd = ::open(store_path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (lock.fd < 0) {
        throw Error("store_records: cannot open " + store_path.string() + ": " +
                    std::strerror(errno));
    }
    if (::flock(lock.fd, LOCK_EX) != 0) {
        throw Error("store_records: cannot lock " + store_path.string());
    }

    struct stat st{};
    if (::fstat(lock.fd, &st) != 0) throw Error("store_records: fstat failed");
    const off_t base = st.st_size;

    std::string data;
    std::string index;
    off_t offset = base;
    for (const AnalyticalRecord& r : records) {
        const std::string line = record_to_json(r).dump() + "\n";
        index += std::to_string(offset) + "\t" + record_kind_name(r.kind) + "\t" +
                 r.stressor + "\t" + std::to_string(r.produced_at) + "\n";
        offset += static_cast<off_t>(line.size());
        data += line;
    }

    const ssize_t written = ::write(lock.fd, data.data(), data.size());
    if (written != static_cast<ssize_t>(data.size())) {
        // Roll the partial batch back so it is never visible.
        if (::ftruncate(lock.fd, base) != 0) {
            throw Error("store_records: write failed and rollback failed");
        }
        throw Error("store_records: write failed: " + std::string(std::strerror(errno)));
    }

    std::ofstream idx(index_path_for(store_path), std::ios::app);
    idx << index;  // best effort; queries fall back to a full scan
    return records.size();
}

std::vector<AnalyticalRecord> query_records(const std::filesystem::path& store_path,
                                            const RecordFilter& filter) {
    std::vector<AnalyticalRecord> out;
    std::ifstream in(store_path);
    if (!in) {
        std::cerr << "warning: analytical store not found: " << store_path.string() << "\n";
        return out;
    }

    // The sidecar index lets us skip records without parsing their JSON; it
    // is usable only when it covers the whole data file (append-only prefix
    // property).
    bool used_index = false;
    std::ifstream idx(index_path_for(store_path));
    if (idx) {
        struct Entry {
            std::uint64_t offset;
            std::string kind, stressor;
            std::int64_t produced_at;
        };
        std::vector<Entry> entries;
        std::string line;
        bool ok = true;
        while (std::getline(idx, line)) {
            Entry e;
            std::istringstream ls(line);
            if (!(ls >> e.offset >> e.kind >> e.stressor >> e.produced_at)) {
                ok = false;
                break;
            }
            entries.push_back(std::move(e));
        }
        if (ok && !entries.empty()) {
            in.seekg(0, std::ios::end);
            const std::uint64_t size = static_cast<std::uint64_t>(in.tellg());
            in.seekg(static_cast<std::streamoff>(entries.back().offset));
            std::string last_line;
            if (std::getline(in, last_line) &&
                entries.back().offset + last_line.size() + 1 == size) {
                used_index = true;
                for (const Entry& e : entries) {
                    if (filter.kind && record_kind_name(*filter.kind) != e.kind) continue;
                    if (filter.stressor && *filter.stressor != e.stressor) continue;
                    if (filter.produced_range && !filter.produced_range->contains(e.produced_at)) {
                        continue;
                    }
                    in.clear();
                    in.seekg(static_cast<std::streamoff>(e.offset));
                    std::string rec_line;
                    if (!std::getline(in, rec_line)) {
                        used_index = false;
                        break;
                    }
                    try {
                        out.push_back(record_from_json(json::parse(rec_line)));
                    } catch (const std::exception&) {
                        used_index = false;
                        break;
                    }
                }
            }
        }
    }

    if (!used_index) {
        out.clear();
        in.clear();
        in.seekg(0);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            AnalyticalRecord r;
            try {
                r = record_from_json(json::parse(line));
            } catch (const std::exception& e) {
                throw Error("store line " + std::to_string(line_no) + ": " + e.what());
            }
            if (filter.matches(r)) out.push_back(std::move(r));
        }
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const AnalyticalRecord& a, const AnalyticalRecord& b) {
                         return a.produced_at < b.produced_at;
                     });
    return out;
}

bool RecordFilter::matches(const AnalyticalRecord& r) const {
    if (kind && *kind != r.kind) return false;
    if (stressor && *stressor != r.stressor) return false;
    if (produced_range && !produced_range->contains(r.produced_at)) return false;
    return true;
}

}  // namespace citysense
