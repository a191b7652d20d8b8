#pragma once
// Engine: owns the bank registry, providers and configuration; enforces one
// writer per bank; runs observation refresh on a background executor; and
// persists banks to the data directory (one snapshot file per bank) when one
// is configured.

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "hindsight/bank.hpp"
#include "hindsight/providers.hpp"
#include "hindsight/recall.hpp"
#include "hindsight/reflect.hpp"
#include "hindsight/retain.hpp"
#include "hindsight/store.hpp"

namespace hindsight {

// Single-worker task queue. Tasks may enqueue follow-ups (retries); drain()
// waits until the queue is empty and nothing is running.
class BackgroundExecutor {
public:
    BackgroundExecutor() : worker_([this] { run(); }) {}

    ~BackgroundExecutor() {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            stop_ = true;
        }
        cv_.notify_all();
        worker_.join();
    }

    void enqueue(std::function<void()> task) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            queue_.push_back(std::move(task));
        }
        cv_.notify_all();
    }

    void drain() {
        std::unique_lock<std::mutex> lock(mutex_);
        idle_cv_.wait(lock, [this] { return queue_.empty() && !active_; });
    }

private:
    void run() {
        for (;;) {
            std::function<void()> task;
            {
                std::unique_lock<std::mutex> lock(mutex_);
                cv_.wait(lock, [this] { return stop_ || !queue_.empty(); });
                if (stop_ && queue_.empty()) return;
                task = std::move(queue_.front());
                queue_.pop_front();
                active_ = true;
            }
            try {
                task();
            } catch (...) {
                // background tasks handle their own retries; never crash the worker
            }
            {
                std::lock_guard<std::mutex> lock(mutex_);
                active_ = false;
            }
            idle_cv_.notify_all();
        }
    }

    std::deque<std::function<void()>> queue_;
    std::mutex mutex_;
    std::condition_variable cv_, idle_cv_;
    bool stop_ = false;
    bool active_ = false;
    std::thread worker_;
};

class Engine {
public:
    Engine(EngineConfig config, ProviderSuite providers, std::filesystem::path data_dir = {})
        : config_(std::move(config)), providers_(std::move(providers)), data_dir_(std::move(data_dir)) {
        config_.validate();
        if (!data_dir_.empty()) std::filesystem::create_directories(data_dir_);
    }

    ~Engine() { background_.drain(); }

    const EngineConfig& config() const { return config_; }
    ProviderSuite& providers() { return providers_; }

    std::shared_ptr<MemoryBank> create_bank(const std::string& id, BankProfile profile = {}) {
        validate_bank_id(id);
        std::lock_guard<std::mutex> lock(banks_mutex_);
        if (banks_.count(id) || (!data_dir_.empty() && std::filesystem::exists(bank_path(id))))
            throw ValidationError("bank '" + id + "' already exists");
        profile.background = normalize_first_person(profile.background);
        auto bank = std::make_shared<MemoryBank>(id, std::move(profile));
        banks_[id] = bank;
        persist(*bank);
        return bank;
    }

    bool has_bank(const std::string& id) {
        std::lock_guard<std::mutex> lock(banks_mutex_);
        if (banks_.count(id)) return true;
        return !data_dir_.empty() && std::filesystem::exists(bank_path(id));
    }

    std::shared_ptr<MemoryBank> bank(const std::string& id) {
        std::lock_guard<std::mutex> lock(banks_mutex_);
        auto it = banks_.find(id);
        if (it != banks_.end()) return it->second;
        if (!data_dir_.empty() && std::filesystem::exists(bank_path(id))) {
            auto loaded = std::make_shared<MemoryBank>(load_snapshot(bank_path(id), config_));
            banks_[id] = loaded;
            return loaded;
        }
        throw NotFoundError("bank '" + id + "' not found");
    }

    // Partial profile update; background is normalized to first person and
    // length-checked against the configured maximum.
    BankProfile configure_bank(const std::string& id, const std::function<void(BankProfile&)>& patch) {
        auto b = bank(id);
        BankProfile updated = b->mutate([&](BankState& state) {
            patch(state.profile);
            BehavioralProfile& p = state.profile.profile;
            if (p.skepticism < 1 || p.skepticism > 5 || p.literalism < 1 || p.literalism > 5 ||
                p.empathy < 1 || p.empathy > 5)
                throw ValidationError("disposition parameters must be integers in 1..5");
            if (p.bias_strength < 0.0 || p.bias_strength > 1.0)
                throw ValidationError("bias_strength must be in [0,1]");
            state.profile.background = normalize_first_person(state.profile.background);
            if (static_cast<int>(state.profile.background.size()) > config_.background_max_len)
                throw ValidationError("background exceeds background_max_len");
            return state.profile;
        });
        persist(*b);
        return updated;
    }

    RetainReceipt retain(const std::string& id, const Transcript& transcript, bool biographical,
                         Timestamp now, const EngineConfig* override_config = nullptr) {
        const EngineConfig& cfg = override_config ? *override_config : config_;
        auto b = bank(id);
        RetainReceipt receipt = hindsight::retain(*b, transcript, providers_, cfg, now, biographical);
        persist(*b);
        for (const auto& entity_id : receipt.observation_entities)
            schedule_observation_refresh(id, entity_id, now, 0);
        return receipt;
    }

    RecallResult recall(const std::string& id, const std::string& query, int budget, Timestamp now,
                        const EngineConfig* override_config = nullptr) {
        const EngineConfig& cfg = override_config ? *override_config : config_;
        auto snap = bank(id)->snapshot();
        return hindsight::recall(*snap, query, budget, providers_, cfg, now);
    }

    ReflectResult reflect(const std::string& id, const std::string& query, Timestamp now,
                          const EngineConfig* override_config = nullptr) {
        const EngineConfig& cfg = override_config ? *override_config : config_;
        auto b = bank(id);
        ReflectResult result = hindsight::reflect(*b, query, providers_, cfg, now);
        if (!result.opinions_formed.empty()) persist(*b);
        return result;
    }

    void export_bank(const std::string& id, const std::filesystem::path& path) {
        save_snapshot(*bank(id)->snapshot(), path);
    }

    std::shared_ptr<MemoryBank> import_bank(const std::string& id,
                                            const std::filesystem::path& path) {
        validate_bank_id(id);
        std::lock_guard<std::mutex> lock(banks_mutex_);
        if (banks_.count(id) || (!data_dir_.empty() && std::filesystem::exists(bank_path(id))))
            throw ValidationError("bank '" + id + "' already exists");
        BankState state = load_snapshot(path, config_);
        state.bank_id = id;
        for (auto& [uid, u] : state.units) u.bank_id = id;
        for (auto& [oid, o] : state.opinions) o.bank_id = id;
        auto bank = std::make_shared<MemoryBank>(std::move(state));
        banks_[id] = bank;
        persist(*bank);
        return bank;
    }

    // Blocks until pending observation refreshes (and retries) finish.
    void drain_background() { background_.drain(); }

private:
    static void validate_bank_id(const std::string& id) {
        if (id.empty()) throw ValidationError("bank id must be non-empty");
        for (char c : id) {
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_')
                throw ValidationError("bank id may contain only [A-Za-z0-9_-]");
        }
    }

    std::filesystem::path bank_path(const std::string& id) const {
        return data_dir_ / (id + ".bank.jsonl");
    }

    void persist(MemoryBank& bank) {
        if (data_dir_.empty()) return;
        save_snapshot(*bank.snapshot(), bank_path(bank.snapshot()->bank_id));
    }

    void schedule_observation_refresh(const std::string& bank_id, const std::string& entity_id,
                                      Timestamp now, int attempt) {
        background_.enqueue([this, bank_id, entity_id, now, attempt] {
            try {
                auto b = bank(bank_id);
                b->mutate([&](BankState& state) {
                    refresh_observations(state, entity_id, providers_, config_, now);
                });
                persist(*b);
            } catch (...) {
                // keep previous observations; retry once
                if (attempt < 1) schedule_observation_refresh(bank_id, entity_id, now, attempt + 1);
            }
        });
    }

    EngineConfig config_;
    ProviderSuite providers_;
    std::filesystem::path data_dir_;
    std::map<std::string, std::shared_ptr<MemoryBank>> banks_;
    std::mutex banks_mutex_;
    BackgroundExecutor background_;
};

}  // namespace hindsight
