#pragma once
// Snapshot persistence: one line-delimited structured-text file per bank.
// The header carries format_version, the id sequences, a record count for
// truncation detection and a checksum over the canonical record dumps.
// Indexes are rebuilt from the unit table at load, so a loaded bank is
// index-coherent by construction. Saves go through a temp file + rename.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hindsight/bank.hpp"
#include "hindsight/serialization.hpp"
#include "hindsight/text.hpp"

namespace hindsight {

constexpr int kSnapshotFormatVersion = 1;

namespace store_detail {

inline void append_record(std::string& out, uint64_t& checksum, const char* kind, const json& data) {
    std::string dump = data.dump();
    checksum = fnv1a64(dump, checksum);
    json line;
    line["kind"] = kind;
    line["data"] = data;
    out += line.dump();
    out += "\n";
}

}  // namespace store_detail

// Serializes the full bank state to the snapshot text format.
inline std::string to_snapshot_text(const BankState& state) {
    std::string body;
    uint64_t checksum = 14695981039346656037ULL;
    size_t records = 0;

    store_detail::append_record(body, checksum, "profile", to_json(state.profile));
    ++records;
    for (const auto& [id, u] : state.units) {
        store_detail::append_record(body, checksum, "unit", to_json(u));
        ++records;
    }
    for (const auto& [key, e] : state.edges) {
        store_detail::append_record(body, checksum, "edge", to_json(e));
        ++records;
    }
    for (const auto& [id, e] : state.entities) {
        store_detail::append_record(body, checksum, "entity", to_json(e));
        ++records;
    }
    for (const auto& [id, o] : state.opinions) {
        store_detail::append_record(body, checksum, "opinion", to_json(o));
        ++records;
    }

    json header;
    header["format_version"] = kSnapshotFormatVersion;
    header["kind"] = "header";
    header["bank_id"] = state.bank_id;
    header["unit_seq"] = state.unit_seq;
    header["entity_seq"] = state.entity_seq;
    header["record_count"] = records;
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(checksum));
    header["checksum"] = hex;
    return header.dump() + "\n" + body;
}

// Parses a snapshot; any structural problem (bad header, version mismatch,
// truncation, checksum mismatch) throws StorageError and yields no partial
// bank. Units are re-indexed as they load.
inline BankState bank_state_from_snapshot_text(const std::string& text, const EngineConfig& config) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw StorageError("snapshot: empty file");

    json header;
    try {
        header = json::parse(line);
    } catch (const std::exception& e) {
        throw StorageError(std::string("snapshot: bad header: ") + e.what());
    }
    if (!header.contains("format_version") || !header.contains("record_count"))
        throw StorageError("snapshot: header missing required fields");
    int version = header["format_version"].get<int>();
    if (version != kSnapshotFormatVersion)
        throw StorageError("snapshot: unsupported format_version " + std::to_string(version));

    BankState state;
    state.bank_id = header.value("bank_id", "");
    state.unit_seq = header.value("unit_seq", static_cast<int64_t>(0));
    state.entity_seq = header.value("entity_seq", static_cast<int64_t>(0));

    size_t expected = header["record_count"].get<size_t>();
    size_t seen = 0;
    uint64_t checksum = 14695981039346656037ULL;
    std::vector<MemoryUnit> pending_units;
    std::vector<Edge> pending_edges;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const std::exception& e) {
            throw StorageError(std::string("snapshot: bad record: ") + e.what());
        }
        std::string kind = record.value("kind", "");
        const json& data = record.at("data");
        checksum = fnv1a64(data.dump(), checksum);
        try {
            if (kind == "profile") {
                state.profile = bank_profile_from_json(data);
            } else if (kind == "unit") {
                pending_units.push_back(unit_from_json(data));
            } else if (kind == "edge") {
                pending_edges.push_back(edge_from_json(data));
            } else if (kind == "entity") {
                Entity e = entity_from_json(data);
                state.entities[e.id] = std::move(e);
            } else if (kind == "opinion") {
                Opinion o = opinion_from_json(data);
                state.opinions[o.id] = std::move(o);
            } else {
                throw StorageError("snapshot: unknown record kind '" + kind + "'");
            }
        } catch (const StorageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StorageError(std::string("snapshot: malformed ") + kind + " record: " + e.what());
        }
        ++seen;
    }
    if (seen != expected)
        throw StorageError("snapshot: truncated file (expected " + std::to_string(expected) +
                           " records, found " + std::to_string(seen) + ")");
    if (header.contains("checksum")) {
        char hex[24];
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(checksum));
        if (header["checksum"].get<std::string>() != hex)
            throw StorageError("snapshot: checksum mismatch");
    }

    state.upsert_units(pending_units, config);
    for (const auto& e : pending_edges) state.add_edge(e);
    return state;
}

inline void save_snapshot(const BankState& state, const std::filesystem::path& path) {
    static std::atomic<uint64_t> save_counter{0};
    std::filesystem::path tmp = path;
    tmp += ".tmp" + std::to_string(save_counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StorageError("snapshot: cannot open " + tmp.string() + " for writing");
        out << to_snapshot_text(state);
        if (!out) throw StorageError("snapshot: write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw StorageError("snapshot: rename failed: " + ec.message());
}

inline BankState load_snapshot(const std::filesystem::path& path, const EngineConfig& config) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("snapshot: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return bank_state_from_snapshot_text(buf.str(), config);
}

}  // namespace hindsight
