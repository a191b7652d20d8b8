#pragma once
// Shared dispatch layer for the CLI and the HTTP facade. Both build a
// CommandEnvelope and hand it to dispatch(), so identical envelopes produce
// identical engine-level results regardless of transport.

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include <httplib.h>

#include "hindsight/engine.hpp"
#include "hindsight/serialization.hpp"

namespace hindsight {

// --- Result serialization -----------------------------------------------------

inline json to_json(const EdgeCounts& c) {
    return json{{"temporal", c.temporal},
                {"semantic", c.semantic},
                {"entity", c.entity},
                {"causal", c.causal}};
}

inline json to_json(const OpinionUpdate& u) {
    return json{{"opinion_id", u.opinion_id},
                {"old_confidence", u.old_confidence},
                {"new_confidence", u.new_confidence},
                {"label", to_string(u.label)},
                {"text_revised", u.text_revised}};
}

inline json to_json(const RetainReceipt& r) {
    json merged = json::array();
    for (const auto& [mention, entity] : r.merged_entities)
        merged.push_back(json{{"mention", mention}, {"entity_id", entity}});
    json updates = json::array();
    for (const auto& u : r.opinions_updated) updates.push_back(to_json(u));
    return json{{"fact_ids", r.fact_ids},
                {"new_entities", r.new_entities},
                {"merged_entities", merged},
                {"edges_created", to_json(r.edges_created)},
                {"opinions_updated", updates},
                {"background_changed", r.background_changed},
                {"observation_entities", r.observation_entities},
                {"warnings", r.warnings}};
}

inline json to_json(const RecallItem& item, bool explain) {
    json j{{"unit_id", item.unit_id},
           {"text", item.text},
           {"fused_score", item.fused_score},
           {"channels_hit", item.channels_hit}};
    if (item.rerank_score)
        j["rerank_score"] = *item.rerank_score;
    else
        j["rerank_score"] = nullptr;
    if (explain) j["channel_ranks"] = item.channel_ranks;
    return j;
}

inline json to_json(const RecallResult& r, bool explain = false) {
    json items = json::array();
    for (const auto& item : r.items) items.push_back(to_json(item, explain));
    json j{{"items", items},
           {"total_tokens", r.total_tokens},
           {"budget", r.budget},
           {"rerank_fallback", r.rerank_fallback}};
    if (r.temporal_range_used) {
        j["temporal_range_used"] = json{{"start", r.temporal_range_used->first},
                                        {"end", r.temporal_range_used->second}};
    } else {
        j["temporal_range_used"] = nullptr;
    }
    return j;
}

inline json to_json(const ReflectResult& r) {
    json formed = json::array();
    for (const auto& o : r.opinions_formed) formed.push_back(to_json(o));
    json updates = json::array();
    for (const auto& u : r.opinions_updated) updates.push_back(to_json(u));
    return json{{"response_text", r.response_text},
                {"opinions_formed", formed},
                {"opinions_updated", updates},
                {"memories_used", r.memories_used},
                {"system_message_used", r.system_message_used},
                {"warnings", r.warnings}};
}

// --- Command envelope ----------------------------------------------------------

struct CommandEnvelope {
    std::string verb;  // create-bank | configure | retain | recall | reflect |
                       // inspect | export | import
    std::string bank_id;
    json payload = json::object();
    json config_overrides = json::object();
};

namespace service_detail {

inline Timestamp parse_now(const json& payload) {
    if (!payload.contains("now") || payload["now"].is_null()) return system_now();
    const json& v = payload["now"];
    if (v.is_number_integer()) return v.get<Timestamp>();
    if (v.is_string()) {
        if (auto ts = parse_iso(v.get<std::string>())) return *ts;
        throw ValidationError("unparseable 'now' timestamp: " + v.get<std::string>());
    }
    throw ValidationError("'now' must be a unix timestamp or ISO date string");
}

inline Transcript transcript_from_json(const json& j) {
    if (!j.is_array() || j.empty())
        throw ValidationError("transcript must be a non-empty array of turns");
    Transcript t;
    for (const auto& rec : j) {
        TranscriptTurn turn;
        if (!rec.contains("speaker") || !rec.contains("text"))
            throw ValidationError("transcript turn requires speaker and text");
        turn.speaker = rec["speaker"].get<std::string>();
        turn.text = rec["text"].get<std::string>();
        if (rec.contains("timestamp")) {
            const json& ts = rec["timestamp"];
            if (ts.is_number_integer()) {
                turn.timestamp = ts.get<Timestamp>();
            } else if (ts.is_string()) {
                auto parsed = parse_iso(ts.get<std::string>());
                if (!parsed)
                    throw ValidationError("unparseable turn timestamp: " + ts.get<std::string>());
                turn.timestamp = *parsed;
            }
        }
        t.push_back(std::move(turn));
    }
    return t;
}

inline void apply_profile_patch(BankProfile& profile, const json& payload) {
    if (payload.contains("name")) profile.name = payload["name"].get<std::string>();
    if (payload.contains("background"))
        profile.background = payload["background"].get<std::string>();
    if (payload.contains("skepticism")) profile.profile.skepticism = payload["skepticism"].get<int>();
    if (payload.contains("literalism")) profile.profile.literalism = payload["literalism"].get<int>();
    if (payload.contains("empathy")) profile.profile.empathy = payload["empathy"].get<int>();
    if (payload.contains("bias_strength"))
        profile.profile.bias_strength = payload["bias_strength"].get<double>();
}

inline json inspect_bank(const BankState& state, const std::string& what) {
    json records = json::array();
    if (what == "units") {
        for (const auto& [id, u] : state.units) records.push_back(to_json(u));
    } else if (what == "opinions") {
        for (const auto& [id, o] : state.opinions) records.push_back(to_json(o));
    } else if (what == "entities") {
        for (const auto& [id, e] : state.entities) records.push_back(to_json(e));
    } else if (what == "edges") {
        for (const auto& [key, e] : state.edges) records.push_back(to_json(e));
    } else if (what == "profile") {
        records.push_back(to_json(state.profile));
    } else if (what == "summary") {
        std::map<std::string, int> per_network;
        for (const auto& [id, u] : state.units) per_network[to_string(u.network)] += 1;
        records.push_back(json{{"bank_id", state.bank_id},
                               {"units", state.units.size()},
                               {"units_per_network", per_network},
                               {"edges", state.edges.size()},
                               {"entities", state.entities.size()},
                               {"opinions", state.opinions.size()},
                               {"profile", to_json(state.profile)}});
    } else {
        throw ValidationError("inspect: unknown target '" + what +
                              "' (use summary|units|opinions|entities|edges|profile)");
    }
    return json{{"records", records}};
}

}  // namespace service_detail

// Applies envelope overrides to the engine config; returns nullopt when there
// are none so callers can use the engine default.
inline std::optional<EngineConfig> effective_config(const Engine& engine,
                                                    const CommandEnvelope& envelope) {
    if (envelope.config_overrides.empty()) return std::nullopt;
    json merged = to_json(engine.config());
    for (const auto& [key, value] : envelope.config_overrides.items()) {
        if (merged.contains(key) && merged[key].is_object() && value.is_object()) {
            for (const auto& [k2, v2] : value.items()) merged[key][k2] = v2;
        } else {
            merged[key] = value;
        }
    }
    return engine_config_from_json(merged);
}

// Engine-level dispatch shared by CLI and HTTP. Throws the typed engine
// errors; transports map them to exit codes / HTTP statuses.
inline json dispatch(Engine& engine, const CommandEnvelope& envelope) {
    auto override_cfg = effective_config(engine, envelope);
    const EngineConfig* cfg = override_cfg ? &*override_cfg : nullptr;
    const json& payload = envelope.payload;

    auto echo_config = [&](json result) {
        result["effective_config"] = to_json(cfg ? *cfg : engine.config());
        return result;
    };

    if (envelope.verb == "create-bank") {
        BankProfile profile;
        service_detail::apply_profile_patch(profile, payload);
        auto bank = engine.create_bank(envelope.bank_id, profile);
        return json{{"bank_id", envelope.bank_id}, {"profile", to_json(bank->snapshot()->profile)}};
    }
    if (envelope.verb == "configure") {
        BankProfile updated = engine.configure_bank(envelope.bank_id, [&](BankProfile& p) {
            service_detail::apply_profile_patch(p, payload);
        });
        return json{{"bank_id", envelope.bank_id}, {"profile", to_json(updated)}};
    }
    if (envelope.verb == "retain") {
        if (!payload.contains("transcript"))
            throw ValidationError("retain payload requires 'transcript'");
        Transcript transcript = service_detail::transcript_from_json(payload["transcript"]);
        bool biographical = payload.value("biographical", false);
        Timestamp now = service_detail::parse_now(payload);
        RetainReceipt receipt =
            engine.retain(envelope.bank_id, transcript, biographical, now, cfg);
        return echo_config(to_json(receipt));
    }
    if (envelope.verb == "recall") {
        if (!payload.contains("query")) throw ValidationError("recall payload requires 'query'");
        std::string query = payload["query"].get<std::string>();
        int budget = payload.value("budget", 1024);
        if (budget < 0) throw ValidationError("budget must be >= 0");
        Timestamp now = service_detail::parse_now(payload);
        bool explain = payload.value("explain", false);
        RecallResult result = engine.recall(envelope.bank_id, query, budget, now, cfg);
        return echo_config(to_json(result, explain));
    }
    if (envelope.verb == "reflect") {
        if (!payload.contains("query")) throw ValidationError("reflect payload requires 'query'");
        std::string query = payload["query"].get<std::string>();
        Timestamp now = service_detail::parse_now(payload);
        ReflectResult result = engine.reflect(envelope.bank_id, query, now, cfg);
        return echo_config(to_json(result));
    }
    if (envelope.verb == "inspect") {
        auto snap = engine.bank(envelope.bank_id)->snapshot();
        return service_detail::inspect_bank(*snap, payload.value("what", "summary"));
    }
    if (envelope.verb == "export") {
        if (!payload.contains("path")) throw ValidationError("export payload requires 'path'");
        engine.export_bank(envelope.bank_id, payload["path"].get<std::string>());
        return json{{"bank_id", envelope.bank_id}, {"path", payload["path"]}};
    }
    if (envelope.verb == "import") {
        if (!payload.contains("path")) throw ValidationError("import payload requires 'path'");
        engine.import_bank(envelope.bank_id, payload["path"].get<std::string>());
        return json{{"bank_id", envelope.bank_id}, {"path", payload["path"]}};
    }
    throw ValidationError("unknown verb '" + envelope.verb + "'");
}

// --- HTTP facade -----------------------------------------------------------------

// Maps engine errors to status codes: validation 400, not-found 404,
// provider 502, storage 500.
inline std::pair<int, json> run_guarded(const std::function<json()>& fn) {
    try {
        return {200, fn()};
    } catch (const ValidationError& e) {
        return {400, json{{"error", e.what()}, {"violations", e.violations}}};
    } catch (const NotFoundError& e) {
        return {404, json{{"error", e.what()}}};
    } catch (const ProviderError& e) {
        return {502, json{{"error", e.what()}}};
    } catch (const ConfigError& e) {
        return {400, json{{"error", e.what()}}};
    } catch (const StorageError& e) {
        return {500, json{{"error", e.what()}}};
    } catch (const std::exception& e) {
        return {500, json{{"error", e.what()}}};
    }
}

class HttpService {
public:
    explicit HttpService(Engine& engine) : engine_(engine) { wire_routes(); }

    ~HttpService() { stop(); }

    // Binds and serves on a background thread. port 0 picks a free port.
    int start(int port) {
        if (port == 0) {
            port_ = server_.bind_to_any_port("127.0.0.1");
        } else {
            if (!server_.bind_to_port("127.0.0.1", port))
                throw StorageError("cannot bind port " + std::to_string(port));
            port_ = port;
        }
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port_;
    }

    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

    int port() const { return port_; }

private:
    void wire_routes() {
        server_.Post("/banks", [this](const httplib::Request& req, httplib::Response& res) {
            respond(res, [&] {
                json body = json::parse(req.body);
                CommandEnvelope env;
                env.verb = "create-bank";
                env.bank_id = body.value("bank_id", "");
                env.payload = body;
                return dispatch(engine_, env);
            });
        });
        wire_bank_verb("retain");
        wire_bank_verb("recall");
        wire_bank_verb("reflect");
        server_.Get(R"(/banks/([A-Za-z0-9_-]+)/inspect)",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        respond(res, [&] {
                            CommandEnvelope env;
                            env.verb = "inspect";
                            env.bank_id = req.matches[1];
                            env.payload["what"] = req.get_param_value("what").empty()
                                                      ? "summary"
                                                      : req.get_param_value("what");
                            return dispatch(engine_, env);
                        });
                    });
    }

    void wire_bank_verb(const std::string& verb) {
        server_.Post(R"(/banks/([A-Za-z0-9_-]+)/)" + verb,
                     [this, verb](const httplib::Request& req, httplib::Response& res) {
                         respond(res, [&] {
                             CommandEnvelope env;
                             env.verb = verb;
                             env.bank_id = req.matches[1];
                             env.payload = req.body.empty() ? json::object() : json::parse(req.body);
                             if (env.payload.contains("config_overrides"))
                                 env.config_overrides = env.payload["config_overrides"];
                             return dispatch(engine_, env);
                         });
                     });
    }

    static void respond(httplib::Response& res, const std::function<json()>& fn) {
        auto [status, body] = run_guarded([&]() -> json {
            try {
                return fn();
            } catch (const json::exception& e) {
                throw ValidationError(std::string("malformed request body: ") + e.what());
            }
        });
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    Engine& engine_;
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

// Spec entry point: serves the engine over HTTP on the given port (0 picks a
// free one); returns the running service.
inline std::unique_ptr<HttpService> serve_http(Engine& engine, int port) {
    auto service = std::make_unique<HttpService>(engine);
    service->start(port);
    return service;
}

}  // namespace hindsight
