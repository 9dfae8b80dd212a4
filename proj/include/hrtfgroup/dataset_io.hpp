// On-disk dataset directory format:
//   manifest.json   {"sample_rate_hz":44100,"hrir_len":200,"grid":"cipic","subjects":[...]}
//   anthro.csv      header "id,p1..p27", one row per subject
//   hrir_<id>.f64   little-endian float64, 1250 x 200 row-major, grid order
#pragma once

#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hrtfgroup/dataset.hpp"
#include "hrtfgroup/error.hpp"

namespace hrtfgroup {

// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct LoadOptions {
    // strict: incomplete subjects abort the load instead of being skipped.
    bool strict = false;
    std::function<void(const std::string&)> warn = [](const std::string& msg) {
        std::cerr << "warning: " << msg << "\n";
    };
};

namespace detail {

inline void write_le_doubles(std::ostream& os, const std::vector<double>& values) {
    static_assert(sizeof(double) == 8);
    // assumes little-endian host, which this library targets
    os.write(reinterpret_cast<const char*>(values.data()),
             static_cast<std::streamsize>(values.size() * 8));
}

inline double parse_double(const std::string& tok, const std::string& context) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw DataError("malformed number '" + tok + "' in " + context);
    }
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace detail

inline void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
    dataset.validate();
    std::filesystem::create_directories(dir);

    nlohmann::json manifest;
    manifest["sample_rate_hz"] = 44100;
    manifest["hrir_len"] = 200;
    manifest["grid"] = "cipic";
    auto ids = nlohmann::json::array();
    for (const auto& s : dataset.subjects) ids.push_back(s.id);
    manifest["subjects"] = ids;
    {
        std::ofstream os(dir / "manifest.json");
        if (!os) throw DataError("cannot write " + (dir / "manifest.json").string());
        os << manifest.dump(2) << "\n";
    }

    {
        std::ofstream os(dir / "anthro.csv");
        if (!os) throw DataError("cannot write " + (dir / "anthro.csv").string());
        os << "id";
        for (std::size_t i = 1; i <= kAnthroParams; ++i) os << ",p" << i;
        os << "\n";
        for (const auto& s : dataset.subjects) {
            os << s.id;
            for (double v : s.anthro_raw) os << "," << format_double(v);
            os << "\n";
        }
    }

    for (const auto& s : dataset.subjects) {
        const auto path = dir / ("hrir_" + s.id + ".f64");
        std::ofstream os(path, std::ios::binary);
        if (!os) throw DataError("cannot write " + path.string());
        detail::write_le_doubles(os, s.hrirs.storage());
    }
}

inline Dataset load_dataset(const std::filesystem::path& dir, const LoadOptions& options = {}) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream mf(manifest_path);
    if (!mf) throw DataError("missing file: " + manifest_path.string());
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    if (manifest.value("grid", "") != "cipic") throw DataError("manifest: unsupported grid");
    if (manifest.value("hrir_len", 0) != static_cast<int>(kHrirLength)) {
        throw DataError("manifest: hrir_len must be 200");
    }

    // anthro.csv
    const auto anthro_path = dir / "anthro.csv";
    std::ifstream af(anthro_path);
    if (!af) throw DataError("missing file: " + anthro_path.string());
    std::string line;
    if (!std::getline(af, line)) throw DataError("anthro.csv: empty file");
    std::map<std::string, std::vector<double>> anthro;
    std::size_t line_no = 1;
    while (std::getline(af, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto toks = detail::split_csv_line(line);
        if (toks.size() != 1 + kAnthroParams) {
            throw DataError("anthro.csv line " + std::to_string(line_no) + ": expected " +
                            std::to_string(1 + kAnthroParams) + " fields, got " +
                            std::to_string(toks.size()));
        }
        std::vector<double> vals(kAnthroParams);
        for (std::size_t i = 0; i < kAnthroParams; ++i) {
            vals[i] = detail::parse_double(toks[i + 1],
                                           "anthro.csv line " + std::to_string(line_no));
        }
        anthro[toks[0]] = std::move(vals);
    }

    Dataset dataset;
    dataset.grid = build_cipic_grid();
    dataset.sample_rate_hz = manifest.value("sample_rate_hz", 44100.0);

    for (const auto& id_json : manifest.at("subjects")) {
        const std::string id = id_json.get<std::string>();
        auto it = anthro.find(id);
        if (it == anthro.end()) throw DataError("anthro.csv: no row for subject " + id);

        const auto hrir_path = dir / ("hrir_" + id + ".f64");
        std::ifstream hf(hrir_path, std::ios::binary);
        if (!hf) throw DataError("missing file: " + hrir_path.string());
        hf.seekg(0, std::ios::end);
        const auto bytes = static_cast<std::uint64_t>(hf.tellg());
        hf.seekg(0, std::ios::beg);
        if (bytes % 8 != 0) {
            throw DataError("subject " + id + ": hrir file size not a multiple of 8 bytes");
        }
        const std::uint64_t n_doubles = bytes / 8;
        if (n_doubles % kHrirLength != 0) {
            throw DataError("subject " + id + ": hrir row " +
                            std::to_string(n_doubles / kHrirLength) + " has length " +
                            std::to_string(n_doubles % kHrirLength) + ", expected 200");
        }
        const std::uint64_t rows = n_doubles / kHrirLength;
        if (rows != kGridDirections) {
            const std::string msg = "subject " + id + ": incomplete grid (" +
                                    std::to_string(rows) + " of 1250 directions)";
            if (options.strict) throw DataError(msg);
            options.warn(msg + ", skipping subject");
            continue;
        }

        Subject subject;
        subject.id = id;
        subject.anthro_raw = it->second;
        subject.hrirs = Matrix(kGridDirections, kHrirLength);
        hf.read(reinterpret_cast<char*>(subject.hrirs.data()),
                static_cast<std::streamsize>(bytes));
        if (!hf) throw DataError("subject " + id + ": short read from " + hrir_path.string());
        for (std::size_t i = 0; i < subject.hrirs.size(); ++i) {
            if (!std::isfinite(subject.hrirs.data()[i])) {
                throw DataError("subject " + id + ": non-finite HRIR sample at row " +
                                std::to_string(i / kHrirLength));
            }
        }
        subject.validate();
        dataset.subjects.push_back(std::move(subject));
    }

    dataset.validate();
    return dataset;
}

}  // namespace hrtfgroup
