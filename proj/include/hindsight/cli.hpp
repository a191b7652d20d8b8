#pragma once
// CLI front end. Builds a CommandEnvelope per subcommand and routes it
// through the same dispatch layer as the HTTP facade. Output is
// line-delimited JSON on stdout (--pretty for humans). Exit codes: 0 ok,
// 2 usage, 3 validation, 4 provider, 5 storage, 6 not found.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hindsight/mock_providers.hpp"
#include "hindsight/service.hpp"

namespace hindsight {

namespace cli_detail {

inline std::atomic<bool> g_serve_interrupted{false};

inline void apply_set_override(json& config_json, const std::string& spec) {
    auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw ValidationError("--set expects key=value, got '" + spec + "'");
    std::string key = spec.substr(0, eq);
    std::string raw = spec.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;  // unquoted strings
    }
    json* slot = &config_json;
    size_t pos = 0;
    while (true) {
        auto dot = key.find('.', pos);
        std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (dot == std::string::npos) {
            (*slot)[part] = value;
            break;
        }
        slot = &(*slot)[part];
        pos = dot + 1;
    }
}

inline Transcript read_transcript_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot open transcript file: " + path);
    json turns = json::array();
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            turns.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw ValidationError("malformed transcript line: " + std::string(e.what()));
        }
    }
    return service_detail::transcript_from_json(turns);
}

inline void print_result(const json& result, bool pretty, std::ostream& out) {
    if (result.contains("records") && result["records"].is_array()) {
        for (const auto& rec : result["records"]) out << rec.dump(pretty ? 2 : -1) << "\n";
        return;
    }
    out << result.dump(pretty ? 2 : -1) << "\n";
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"hindsight: four-network agent memory engine (retain / recall / reflect)"};
    app.require_subcommand(0, 1);

    std::string data_dir;
    if (const char* env = std::getenv("HINDSIGHT_DATA")) data_dir = env;
    if (data_dir.empty()) data_dir = "hindsight-data";
    std::string config_path;
    if (const char* env = std::getenv("HINDSIGHT_CONFIG")) config_path = env;
    std::string provider = "mock";
    bool pretty = false;
    std::vector<std::string> sets;
    app.add_option("--data-dir", data_dir, "Directory holding bank snapshot files");
    app.add_option("--config", config_path, "Engine config JSON file (env HINDSIGHT_CONFIG)");
    app.add_option("--provider", provider, "Provider suite: mock | external")
        ->check(CLI::IsMember({"mock", "external"}));
    app.add_flag("--pretty", pretty, "Human-readable indented output");
    app.add_option("--set", sets, "Config override key=value (dotted keys allowed)");

    std::string bank_id, name, background, file_path, query, now_text, out_path, in_path, what =
        "summary";
    int skepticism = 0, literalism = 0, empathy = 0, budget = 1024, port = 7551;
    double bias = -1.0;
    bool biographical = false, explain = false, show_system_message = false;
    bool want_opinions = false, want_entities = false, want_units = false, want_edges = false,
         want_profile = false;

    auto add_bank_opt = [&](CLI::App* cmd) {
        cmd->add_option("--bank", bank_id, "Bank id")->required();
    };
    auto add_profile_opts = [&](CLI::App* cmd) {
        cmd->add_option("--name", name, "Agent name");
        cmd->add_option("--background", background, "Agent background (first person)");
        cmd->add_option("--skepticism", skepticism, "1..5")->check(CLI::Range(1, 5));
        cmd->add_option("--literalism", literalism, "1..5")->check(CLI::Range(1, 5));
        cmd->add_option("--empathy", empathy, "1..5")->check(CLI::Range(1, 5));
        cmd->add_option("--bias", bias, "Bias strength 0..1")->check(CLI::Range(0.0, 1.0));
    };

    CLI::App* create = app.add_subcommand("create-bank", "Create a new memory bank");
    add_bank_opt(create);
    add_profile_opts(create);

    CLI::App* configure = app.add_subcommand("configure", "Update a bank's profile");
    add_bank_opt(configure);
    add_profile_opts(configure);

    CLI::App* retain_cmd = app.add_subcommand("retain", "Ingest a transcript into a bank");
    add_bank_opt(retain_cmd);
    retain_cmd->add_option("--file", file_path, "Transcript file (JSONL turns)")->required();
    retain_cmd->add_flag("--biographical", biographical, "Merge input into the bank background");
    retain_cmd->add_option("--now", now_text, "Ingestion time (ISO or unix seconds)");

    CLI::App* recall_cmd = app.add_subcommand("recall", "Budgeted multi-channel retrieval");
    add_bank_opt(recall_cmd);
    recall_cmd->add_option("--query", query, "Query text")->required();
    recall_cmd->add_option("--budget", budget, "Token budget")->required();
    recall_cmd->add_flag("--explain", explain, "Include per-channel ranks and scores");
    recall_cmd->add_option("--now", now_text, "Reference time (ISO or unix seconds)");

    CLI::App* reflect_cmd = app.add_subcommand("reflect", "Preference-conditioned response");
    add_bank_opt(reflect_cmd);
    reflect_cmd->add_option("--query", query, "Query text")->required();
    reflect_cmd->add_flag("--show-system-message", show_system_message,
                          "Print the system message used");
    reflect_cmd->add_option("--now", now_text, "Reference time (ISO or unix seconds)");

    CLI::App* inspect_cmd = app.add_subcommand("inspect", "Dump bank contents");
    add_bank_opt(inspect_cmd);
    inspect_cmd->add_option("--what", what, "summary|units|opinions|entities|edges|profile");
    inspect_cmd->add_flag("--opinions", want_opinions, "Shortcut for --what opinions");
    inspect_cmd->add_flag("--entities", want_entities, "Shortcut for --what entities");
    inspect_cmd->add_flag("--units", want_units, "Shortcut for --what units");
    inspect_cmd->add_flag("--edges", want_edges, "Shortcut for --what edges");
    inspect_cmd->add_flag("--profile", want_profile, "Shortcut for --what profile");

    CLI::App* export_cmd = app.add_subcommand("export", "Write a bank snapshot file");
    add_bank_opt(export_cmd);
    export_cmd->add_option("--out", out_path, "Destination path")->required();

    CLI::App* import_cmd = app.add_subcommand("import", "Create a bank from a snapshot file");
    add_bank_opt(import_cmd);
    import_cmd->add_option("--in", in_path, "Source snapshot path")->required();

    CLI::App* serve_cmd = app.add_subcommand("serve", "Serve the HTTP facade");
    serve_cmd->add_option("--port", port, "Port to listen on");

    std::vector<std::string> argv_copy(args);
    try {
        std::vector<const char*> argv;
        argv.push_back("hindsight");
        for (const auto& a : argv_copy) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        // Effective config: file, then --set overrides. The file may also
        // carry the provider selection key; an explicit --provider flag wins.
        json config_json = to_json(EngineConfig{});
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw StorageError("cannot open config file: " + config_path);
            json file_json = json::parse(in, nullptr, true, true);
            for (const auto& [k, v] : file_json.items()) config_json[k] = v;
        }
        for (const auto& s : sets) cli_detail::apply_set_override(config_json, s);
        if (config_json.contains("provider")) {
            std::string from_config = config_json["provider"].get<std::string>();
            if (from_config != "mock" && from_config != "external")
                throw ValidationError("config provider must be mock or external");
            if (!app.count("--provider")) provider = from_config;
            config_json.erase("provider");
        }
        EngineConfig config = engine_config_from_json(config_json);

        ProviderSuite providers;
        if (provider == "mock") {
            providers = make_mock_suite(config);
        } else {
            throw ProviderError(
                "no external provider adapter is bundled; wire one in via the library API or use "
                "--provider mock");
        }

        Engine engine(config, providers, data_dir);

        if (app.got_subcommand(serve_cmd)) {
            auto service = serve_http(engine, port);
            out << json{{"listening", service->port()}}.dump() << "\n";
            std::signal(SIGINT, [](int) { cli_detail::g_serve_interrupted = true; });
            std::signal(SIGTERM, [](int) { cli_detail::g_serve_interrupted = true; });
            while (!cli_detail::g_serve_interrupted)
                std::this_thread::sleep_for(std::chrono::milliseconds(100));
            service->stop();
            return 0;
        }

        CommandEnvelope env;
        env.bank_id = bank_id;
        if (app.got_subcommand(create) || app.got_subcommand(configure)) {
            env.verb = app.got_subcommand(create) ? "create-bank" : "configure";
            if (create->count("--name") || configure->count("--name")) env.payload["name"] = name;
            if (create->count("--background") || configure->count("--background"))
                env.payload["background"] = background;
            if (skepticism) env.payload["skepticism"] = skepticism;
            if (literalism) env.payload["literalism"] = literalism;
            if (empathy) env.payload["empathy"] = empathy;
            if (bias >= 0.0) env.payload["bias_strength"] = bias;
        } else if (app.got_subcommand(retain_cmd)) {
            env.verb = "retain";
            json turns = json::array();
            for (const auto& t : cli_detail::read_transcript_file(file_path))
                turns.push_back(json{{"speaker", t.speaker}, {"text", t.text}, {"timestamp", t.timestamp}});
            env.payload["transcript"] = turns;
            env.payload["biographical"] = biographical;
            if (!now_text.empty()) env.payload["now"] = now_text;
        } else if (app.got_subcommand(recall_cmd)) {
            env.verb = "recall";
            env.payload["query"] = query;
            env.payload["budget"] = budget;
            env.payload["explain"] = explain;
            if (!now_text.empty()) env.payload["now"] = now_text;
        } else if (app.got_subcommand(reflect_cmd)) {
            env.verb = "reflect";
            env.payload["query"] = query;
            if (!now_text.empty()) env.payload["now"] = now_text;
        } else if (app.got_subcommand(inspect_cmd)) {
            env.verb = "inspect";
            if (want_opinions) what = "opinions";
            if (want_entities) what = "entities";
            if (want_units) what = "units";
            if (want_edges) what = "edges";
            if (want_profile) what = "profile";
            env.payload["what"] = what;
        } else if (app.got_subcommand(export_cmd)) {
            env.verb = "export";
            env.payload["path"] = out_path;
        } else if (app.got_subcommand(import_cmd)) {
            env.verb = "import";
            env.payload["path"] = in_path;
        } else {
            out << app.help();
            return 2;
        }

        json result = dispatch(engine, env);
        if (env.verb == "retain") engine.drain_background();
        if (env.verb == "reflect" && !show_system_message) result.erase("system_message_used");
        cli_detail::print_result(result, pretty, out);
        return 0;
    } catch (const ValidationError& e) {
        json error{{"error", e.what()}, {"violations", e.violations}};
        err << error.dump() << "\n";
        return 3;
    } catch (const NotFoundError& e) {
        err << json{{"error", e.what()}}.dump() << "\n";
        return 6;
    } catch (const ProviderError& e) {
        err << json{{"error", e.what()}}.dump() << "\n";
        return 4;
    } catch (const ConfigError& e) {
        err << json{{"error", e.what()}}.dump() << "\n";
        return 3;
    } catch (const StorageError& e) {
        err << json{{"error", e.what()}}.dump() << "\n";
        return 5;
    } catch (const std::exception& e) {
        err << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
}

}  // namespace hindsight
