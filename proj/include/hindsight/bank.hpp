#pragma once
// The memory bank: four-network unit table, typed edge set, entity registry,
// opinions and the derived lexical/vector indexes. BankState is an immutable
// value once published; MemoryBank publishes new states atomically so
// readers always see a consistent snapshot and never block on writers.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "hindsight/lexical_index.hpp"
#include "hindsight/types.hpp"
#include "hindsight/vector_index.hpp"

namespace hindsight {

struct EdgeKey {
    std::string source;
    std::string target;
    EdgeKind kind;

    bool operator<(const EdgeKey& o) const {
        if (source != o.source) return source < o.source;
        if (target != o.target) return target < o.target;
        return static_cast<int>(kind) < static_cast<int>(o.kind);
    }
};

struct BankState {
    std::string bank_id;
    BankProfile profile;
    std::map<std::string, MemoryUnit> units;
    std::map<EdgeKey, Edge> edges;  // deduplicated by (source, target, kind)
    std::map<std::string, Entity> entities;
    std::map<std::string, Opinion> opinions;  // keyed by opinion unit id
    int64_t unit_seq = 0;
    int64_t entity_seq = 0;
    LexicalIndex lexical;
    VectorIndex vectors;

    std::string next_unit_id() {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "f%08lld", static_cast<long long>(++unit_seq));
        return buf;
    }

    std::string next_entity_id() {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "e%08lld", static_cast<long long>(++entity_seq));
        return buf;
    }

    // Stores units and keeps the unit table and both indexes in step. The
    // optional fault hook fires between the table and index updates; it
    // exists for the crash-simulation harness.
    std::vector<std::string> upsert_units(const std::vector<MemoryUnit>& new_units,
                                          const EngineConfig& config,
                                          const std::function<void(int)>& fault_hook = {}) {
        for (const auto& u : new_units) {
            auto violations = validate_unit(u, config);
            if (!violations.empty())
                throw ValidationError("unit " + u.id + " failed validation", violations);
        }
        std::vector<std::string> ids;
        for (const auto& u : new_units) {
            if (units.count(u.id)) remove_incident_edges(u.id);
            units[u.id] = u;
            if (fault_hook) fault_hook(0);
            lexical.add(u.id, u.text);
            if (fault_hook) fault_hook(1);
            vectors.add(u.id, u.embedding);
            if (fault_hook) fault_hook(2);
            ids.push_back(u.id);
        }
        return ids;
    }

    void remove_unit(const std::string& id) {
        units.erase(id);
        lexical.remove(id);
        vectors.remove(id);
        opinions.erase(id);
        remove_incident_edges(id);
    }

    // Insert-if-absent; endpoints must exist. Returns true when inserted.
    bool add_edge(const Edge& e) {
        if (e.weight < 0.0 || e.weight > 1.0)
            throw ValidationError("edge weight outside [0,1]");
        if ((e.kind == EdgeKind::Causal) != e.causal_subtype.has_value())
            throw ValidationError("causal_subtype present iff kind == causal");
        if ((e.kind == EdgeKind::Entity) != e.entity_id.has_value())
            throw ValidationError("entity_id present iff kind == entity");
        if (!units.count(e.source) || !units.count(e.target))
            throw ValidationError("edge endpoint not in bank");
        return edges.emplace(EdgeKey{e.source, e.target, e.kind}, e).second;
    }

    // Unit ids in the given networks that mention the entity, sorted by id.
    std::vector<std::string> units_mentioning(const std::string& entity_id,
                                              const std::set<Network>& networks) const {
        std::vector<std::string> out;
        for (const auto& [id, u] : units) {
            if (!networks.count(u.network)) continue;
            for (const auto& eid : u.entity_ids) {
                if (eid == entity_id) {
                    out.push_back(id);
                    break;
                }
            }
        }
        return out;
    }

private:
    void remove_incident_edges(const std::string& unit_id) {
        for (auto it = edges.begin(); it != edges.end();) {
            if (it->second.source == unit_id || it->second.target == unit_id)
                it = edges.erase(it);
            else
                ++it;
        }
    }
};

// Handle to one bank: lock-free snapshots for readers, serialized
// copy-on-write mutations for writers. A mutation that throws publishes
// nothing, which is what makes retain atomic.
class MemoryBank {
public:
    explicit MemoryBank(BankState initial)
        : state_(std::make_shared<const BankState>(std::move(initial))) {}

    MemoryBank(std::string bank_id, BankProfile profile = {}) {
        BankState s;
        s.bank_id = std::move(bank_id);
        s.profile = std::move(profile);
        state_ = std::make_shared<const BankState>(std::move(s));
    }

    std::shared_ptr<const BankState> snapshot() const {
        std::lock_guard<std::mutex> lock(state_mutex_);
        return state_;
    }

    std::string id() const { return snapshot()->bank_id; }

    // Runs fn on a private copy of the state; publishes only on success.
    template <typename Fn>
    auto mutate(Fn&& fn) {
        std::lock_guard<std::mutex> write_lock(write_mutex_);
        BankState working = *snapshot();
        if constexpr (std::is_void_v<decltype(fn(working))>) {
            fn(working);
            publish(std::move(working));
        } else {
            auto result = fn(working);
            publish(std::move(working));
            return result;
        }
    }

private:
    void publish(BankState next) {
        auto published = std::make_shared<const BankState>(std::move(next));
        std::lock_guard<std::mutex> lock(state_mutex_);
        state_ = std::move(published);
    }

    mutable std::mutex state_mutex_;
    std::mutex write_mutex_;
    std::shared_ptr<const BankState> state_;
};

}  // namespace hindsight
