#include "rwr/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "rwr/cot.hpp"
#include "rwr/digest.hpp"
#include "rwr/error.hpp"
#include "rwr/eval.hpp"
#include "rwr/log.hpp"
#include "rwr/ssa.hpp"
#include "rwr/synthetic.hpp"

namespace rwr::cli {

namespace {

struct FlagSpec {
    const char* flag;
    const char* key;
    const char* help;
};

const std::vector<FlagSpec> kBackendFlags = {
    {"--url", "backend.url", "Chat-completions endpoint, scheme://host[:port][/path]"},
    {"--model", "backend.model", "Model name sent with every request"},
    {"--api-key-env", "backend.api_key_env", "Environment variable holding the API key"},
    {"--timeout", "backend.timeout_s", "Per-request timeout in seconds"},
    {"--max-attempts", "backend.max_attempts", "Attempts per request before giving up"},
    {"--parallelism", "backend.parallelism", "Requests in flight per batch"},
    {"--mock-rules", "backend.mock_rules", "JSONL mock rule file used for every role"},
};

const std::vector<FlagSpec> kInferenceFlags = {
    {"--mode", "ssa.mode", "ssa | direct"},
    {"--chunk-units", "ssa.chunk_units", "Chunk size for segmented summarization"},
    {"--window-units", "ssa.window_units", "Context window for direct answering"},
};

std::vector<FlagSpec> flags_for(Subcommand cmd) {
    std::vector<FlagSpec> flags;
    auto add = [&](const std::vector<FlagSpec>& more) { flags.insert(flags.end(), more.begin(), more.end()); };
    switch (cmd) {
        case Subcommand::BuildData:
            add({{"--corpus", "io.corpus", "Example JSONL to build from"},
                 {"--base", "io.base", "Base TrainingRecord JSONL to mix in"},
                 {"--out", "io.out", "TrainingRecord JSONL output"},
                 {"--audit", "io.audit", "Audit log JSON (default <out>.audit.json)"},
                 {"--seed", "seed", "Shuffle seed"}});
            add(kBackendFlags);
            break;
        case Subcommand::Infer:
            add({{"--input", "io.input", "Example JSONL"}, {"--out", "io.out", "Trace JSONL output"}});
            add(kInferenceFlags);
            add(kBackendFlags);
            break;
        case Subcommand::Evaluate:
            add({{"--input", "io.input", "Example JSONL with meta.task tags"},
                 {"--predictions", "io.predictions", "Prediction or trace JSONL; omit for live inference"},
                 {"--bindings", "eval.bindings", "task -> metric JSON"},
                 {"--out", "io.out", "Report JSON output"},
                 {"--label", "eval.label", "Row label in the report table"}});
            add(kInferenceFlags);
            add(kBackendFlags);
            break;
        case Subcommand::Synth:
            add({{"--seed", "seed", "Generator seed"},
                 {"--pairs", "synth.pairs", "Needles (examples) to generate"},
                 {"--units", "synth.units", "Haystack length in length units"},
                 {"--unit", "synth.length_unit", "words | chars_div4"},
                 {"--out", "io.out", "Example JSONL output"}});
            break;
    }
    return flags;
}

const char* description(Subcommand cmd) {
    switch (cmd) {
        case Subcommand::BuildData: return "Build summary-CoT training JSONL (valid + empty summaries) mixed with base data";
        case Subcommand::Infer: return "Answer examples with segmented summarization or a single direct pass";
        case Subcommand::Evaluate: return "Score predictions (or live inference) into a per-task report";
        case Subcommand::Synth: return "Generate a synthetic key-value recall corpus";
    }
    return "";
}

// Applies configured sampling parameters to every exchange.
class SamplingDefaults final : public ChatBackend {
public:
    SamplingDefaults(std::unique_ptr<ChatBackend> inner, double temperature, int max_new, std::string model)
        : inner_(std::move(inner)), temperature_(temperature), max_new_(max_new), model_(std::move(model)) {}

    Completion complete(const ChatExchange& exchange) const override {
        ChatExchange ex = exchange;
        ex.temperature = temperature_;
        ex.max_new = max_new_;
        if (ex.model_name.empty()) ex.model_name = model_;
        return inner_->complete(ex);
    }

private:
    std::unique_ptr<ChatBackend> inner_;
    double temperature_;
    int max_new_;
    std::string model_;
};

// Digest bookkeeping for the manifest.
class RunRecord {
public:
    void input(const std::string& key, const std::string& path) { inputs_[key] = path; }
    void output(const std::string& key, const std::string& path) { outputs_[key] = path; }

    static nlohmann::ordered_json digests(const std::map<std::string, std::string>& files) {
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        for (const auto& [key, path] : files) {
            nlohmann::ordered_json entry{{"path", path}};
            try {
                entry["sha256"] = sha256_file(path);
            } catch (const IoError&) {
                entry["sha256"] = nullptr;
            }
            j[key] = entry;
        }
        return j;
    }

    const std::map<std::string, std::string>& inputs() const { return inputs_; }
    const std::map<std::string, std::string>& outputs() const { return outputs_; }

private:
    std::map<std::string, std::string> inputs_;
    std::map<std::string, std::string> outputs_;
};

LengthUnit unit_setting(const Settings& s, const std::string& key) { return parse_length_unit(s.require(key)); }

std::size_t positive(const Settings& s, const std::string& key) {
    const auto v = s.get_int(key);
    if (v <= 0) throw InvalidArgument("setting " + key + " must be positive");
    return static_cast<std::size_t>(v);
}

void note_mock_inputs(const Settings& s, RunRecord& record, std::initializer_list<std::string_view> roles) {
    if (s.has("backend.mock_rules") && !s.get("backend.mock_rules").empty()) {
        record.input("backend.mock_rules", s.get("backend.mock_rules"));
    }
    for (auto role : roles) {
        const std::string key = std::string(role) + ".mock_rules";
        if (!s.get(key).empty()) record.input(key, s.get(key));
    }
}

ssa::InferenceOptions inference_options(const Settings& s) {
    ssa::InferenceOptions opt;
    opt.mode = ssa::parse_mode(s.require("ssa.mode"));
    opt.ssa.chunk_units = positive(s, "ssa.chunk_units");
    opt.ssa.unit = unit_setting(s, "ssa.length_unit");
    opt.ssa.drop_refusals = s.get_bool("ssa.drop_refusals");
    opt.ssa.refusal = s.require("ssa.refusal");
    opt.ssa.parallelism = positive(s, "backend.parallelism");
    opt.window_units = positive(s, "ssa.window_units");
    opt.parallelism = positive(s, "ssa.example_parallelism");
    return opt;
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

void run_build_data(const Settings& s, RunRecord& record) {
    const auto corpus_path = s.require("io.corpus");
    const auto out_path = s.require("io.out");
    const auto audit_path = s.get("io.audit").empty() ? out_path + ".audit.json" : s.get("io.audit");
    record.input("io.corpus", corpus_path);

    const auto corpus = read_examples(corpus_path);
    std::vector<TrainingRecord> base;
    if (!s.get("io.base").empty()) {
        record.input("io.base", s.get("io.base"));
        base = read_records(s.get("io.base"));
    }

    const auto locator_mode = s.require("pipeline.locator");
    if (locator_mode != "llm" && locator_mode != "exact") {
        throw InvalidArgument("pipeline.locator must be llm or exact");
    }
    note_mock_inputs(s, record, {"extractor", "verifier", "locator"});
    const auto extractor = make_backend(s, "extractor");
    const auto verifier = make_backend(s, "verifier");
    std::unique_ptr<ChatBackend> locator;
    if (locator_mode == "llm") locator = make_backend(s, "locator");

    cot::PipelineConfig cfg;
    cfg.extractor = extractor.get();
    cfg.verifier = verifier.get();
    cfg.locator = locator.get();
    cfg.refusal = s.require("pipeline.refusal");
    cfg.positive_token = s.require("pipeline.positive_token");
    cfg.target_style = cot::parse_target_style(s.require("pipeline.target_style"));
    cfg.cot_count = positive(s, "pipeline.cot_count");
    cfg.base_count = positive(s, "pipeline.base_count");
    cfg.empty_fraction = s.get_double("pipeline.empty_fraction");
    cfg.seed = s.get_u64("seed");
    cfg.policy = {unit_setting(s, "pipeline.length_unit"), positive(s, "pipeline.max_units")};
    cfg.parallelism = positive(s, "backend.parallelism");

    const auto result = cot::build_dataset(corpus, base, cfg);
    write_records(result.records, out_path);
    write_json_file(audit_path, result.audit());
    record.output("io.out", out_path);
    record.output("io.audit", audit_path);
}

void run_infer(const Settings& s, RunRecord& record) {
    const auto input = s.require("io.input");
    const auto out_path = s.require("io.out");
    record.input("io.input", input);
    note_mock_inputs(s, record, {"student"});
    const auto examples = read_examples(input);
    const auto student = make_backend(s, "student");
    const auto traces = ssa::run_inference(examples, inference_options(s), *student);

    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + out_path);
    for (const auto& t : traces) out << ssa::trace_to_json(t).dump() << '\n';
    if (!out) throw IoError("write failed: " + out_path);
    record.output("io.out", out_path);
}

void run_evaluate(const Settings& s, RunRecord& record, std::ostream& stdout_stream) {
    const auto input = s.require("io.input");
    const auto out_path = s.require("io.out");
    if (s.get("eval.bindings").empty()) throw MissingBinding("no task -> metric bindings given (--bindings)");
    record.input("io.input", input);
    record.input("eval.bindings", s.get("eval.bindings"));

    const auto examples = read_examples(input);
    const auto bindings = eval::load_bindings(s.get("eval.bindings"));

    eval::Predictions predictions;
    if (!s.get("io.predictions").empty()) {
        record.input("io.predictions", s.get("io.predictions"));
        predictions = eval::load_predictions(s.get("io.predictions"));
    } else {
        note_mock_inputs(s, record, {"student"});
        const auto student = make_backend(s, "student");
        predictions = eval::predictions_from_traces(ssa::run_inference(examples, inference_options(s), *student));
    }

    std::unique_ptr<ChatBackend> judge;
    for (const auto& [_, b] : bindings) {
        if (b.kind == metrics::MetricKind::LlmJudge && !judge) {
            note_mock_inputs(s, record, {"judge"});
            judge = make_backend(s, "judge");
        }
    }
    eval::EvalOptions options;
    options.label = s.require("eval.label");
    options.judge = judge.get();
    options.parallelism = positive(s, "backend.parallelism");
    const auto report = eval::run_eval(examples, predictions, bindings, options);
    write_json_file(out_path, report.to_json());
    record.output("io.out", out_path);
    stdout_stream << report.to_table();
}

void run_synth(const Settings& s, RunRecord& record) {
    const auto out_path = s.require("io.out");
    const auto corpus = eval::gen_synthetic_recall(s.get_u64("seed"), positive(s, "synth.pairs"),
                                                   positive(s, "synth.units"), unit_setting(s, "synth.length_unit"));
    write_examples(corpus, out_path);
    record.output("io.out", out_path);
}

nlohmann::ordered_json seed_json(const Settings& s) {
    try {
        return s.get_u64("seed");
    } catch (const Error&) {
        return s.get("seed");
    }
}

std::string manifest_path(const Settings& s) {
    if (!s.get("manifest").empty()) return s.get("manifest");
    if (!s.get("io.out").empty()) return s.get("io.out") + ".manifest.json";
    return {};
}

void install_log_sink(const Settings& s, std::ostream& err) {
    if (!s.get("log").empty()) {
        auto file = std::make_shared<std::ofstream>(s.get("log"), std::ios::app);
        if (!*file) throw IoError("cannot open log " + s.get("log"));
        log::set_sink(file, log::Level::Info);
    } else {
        log::set_sink(std::shared_ptr<std::ostream>(&err, [](std::ostream*) {}), log::Level::Warn);
    }
}

struct ParsedCommand {
    Subcommand cmd;
    Settings settings;
};

}  // namespace

std::string_view to_string(Subcommand cmd) {
    switch (cmd) {
        case Subcommand::BuildData: return "build-data";
        case Subcommand::Infer: return "infer";
        case Subcommand::Evaluate: return "evaluate";
        case Subcommand::Synth: return "synth";
    }
    return "";
}

Subcommand parse_subcommand(std::string_view name) {
    for (auto cmd : {Subcommand::BuildData, Subcommand::Infer, Subcommand::Evaluate, Subcommand::Synth}) {
        if (to_string(cmd) == name) return cmd;
    }
    throw InvalidArgument("unknown subcommand '" + std::string(name) + "'");
}

Settings defaults(Subcommand cmd) {
    Settings s;
    s.set("seed", "0");
    auto backend = [&] {
        s.set("backend.path", "/v1/chat/completions");
        s.set("backend.api_key_env", "RWR_API_KEY");
        s.set("backend.timeout_s", "60");
        s.set("backend.max_attempts", "5");
        s.set("backend.backoff_base_s", "0.5");
        s.set("backend.backoff_factor", "2");
        s.set("backend.backoff_jitter", "0.25");
        s.set("backend.parallelism", "4");
        s.set("backend.temperature", "0");
        s.set("backend.max_new", "512");
    };
    auto inference = [&] {
        s.set("ssa.mode", "ssa");
        s.set("ssa.chunk_units", "2000");
        s.set("ssa.window_units", "6000");
        s.set("ssa.length_unit", "words");
        s.set("ssa.drop_refusals", "true");
        s.set("ssa.refusal", std::string(prompts::kDefaultRefusal));
        s.set("ssa.example_parallelism", "1");
    };
    switch (cmd) {
        case Subcommand::BuildData:
            backend();
            s.set("pipeline.refusal", std::string(prompts::kDefaultRefusal));
            s.set("pipeline.positive_token", "yes");
            s.set("pipeline.target_style", "summary_then_answer");
            s.set("pipeline.cot_count", "10000");
            s.set("pipeline.base_count", "100000");
            s.set("pipeline.empty_fraction", "0.5");
            s.set("pipeline.max_units", "6000");
            s.set("pipeline.length_unit", "words");
            s.set("pipeline.locator", "llm");
            break;
        case Subcommand::Infer:
            backend();
            inference();
            break;
        case Subcommand::Evaluate:
            backend();
            inference();
            s.set("eval.label", "model");
            break;
        case Subcommand::Synth:
            s.set("synth.pairs", "20");
            s.set("synth.units", "5000");
            s.set("synth.length_unit", "words");
            break;
    }
    return s;
}

std::unique_ptr<ChatBackend> make_backend(const Settings& s, std::string_view role) {
    const std::string scope(role);
    std::unique_ptr<ChatBackend> inner;
    auto mock_from = [&](const std::string& key) { inner = std::make_unique<MockBackend>(MockBackend::load(s.get(key))); };
    auto http = [&] {
        HttpBackendConfig cfg;
        cfg.url = s.role_get(role, "url");
        cfg.path = s.role_get(role, "path", "/v1/chat/completions");
        cfg.model = s.role_get(role, "model");
        const auto key_env = s.role_get(role, "api_key_env");
        if (!key_env.empty()) {
            if (const char* key = std::getenv(key_env.c_str())) cfg.api_key = key;
        }
        Settings view;
        for (const char* k : {"timeout_s", "max_attempts", "backoff_base_s", "backoff_factor", "backoff_jitter"}) {
            view.set(k, s.role_get(role, k));
        }
        cfg.timeout_s = view.get_double("timeout_s");
        cfg.retry.max_attempts = static_cast<int>(view.get_int("max_attempts"));
        cfg.retry.base_delay_s = view.get_double("backoff_base_s");
        cfg.retry.factor = view.get_double("backoff_factor");
        cfg.retry.jitter = view.get_double("backoff_jitter");
        inner = std::make_unique<HttpBackend>(std::move(cfg));
    };

    if (!s.get(scope + ".mock_rules").empty()) {
        mock_from(scope + ".mock_rules");
    } else if (!s.get(scope + ".url").empty()) {
        http();
    } else if (!s.get("backend.mock_rules").empty()) {
        mock_from("backend.mock_rules");
    } else if (!s.get("backend.url").empty()) {
        http();
    } else {
        throw InvalidArgument("no backend configured for role '" + scope + "' (set --url or --mock-rules)");
    }

    Settings sampling;
    sampling.set(scope + ".temperature", s.role_get(role, "temperature", "0"));
    sampling.set(scope + ".max_new", s.role_get(role, "max_new", "512"));
    const double temperature = sampling.get_double(scope + ".temperature");
    const auto max_new = sampling.get_int(scope + ".max_new");
    if (max_new <= 0 || max_new > std::numeric_limits<int>::max()) {
        throw InvalidArgument("setting " + scope + ".max_new must be a positive int");
    }
    return std::make_unique<SamplingDefaults>(std::move(inner), temperature, static_cast<int>(max_new),
                                              s.role_get(role, "model"));
}

void execute(Subcommand cmd, const Settings& settings, std::ostream& out) {
    const auto started = std::chrono::steady_clock::now();
    RunRecord record;
    std::optional<nlohmann::ordered_json> failure;
    try {
        switch (cmd) {
            case Subcommand::BuildData: run_build_data(settings, record); break;
            case Subcommand::Infer: run_infer(settings, record); break;
            case Subcommand::Evaluate: run_evaluate(settings, record, out); break;
            case Subcommand::Synth: run_synth(settings, record); break;
        }
    } catch (const Error& err) {
        failure = err.to_json();
        const auto path = manifest_path(settings);
        if (!path.empty()) {
            nlohmann::ordered_json m;
            m["subcommand"] = to_string(cmd);
            m["status"] = "error";
            m["error"] = *failure;
            m["settings"] = settings.to_json();
            m["seed"] = seed_json(settings);
            m["inputs"] = RunRecord::digests(record.inputs());
            m["outputs"] = nlohmann::ordered_json::object();
            m["wall_time_s"] =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            try {
                write_json_file(path, m);
            } catch (const Error&) {
            }
        }
        throw;
    }

    const auto path = manifest_path(settings);
    if (path.empty()) return;
    nlohmann::ordered_json m;
    m["subcommand"] = to_string(cmd);
    m["status"] = "ok";
    m["settings"] = settings.to_json();
    m["seed"] = seed_json(settings);
    m["inputs"] = RunRecord::digests(record.inputs());
    m["outputs"] = RunRecord::digests(record.outputs());
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_json_file(path, m);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Summary-CoT dataset building, segmented-summarization inference and long-context recall evaluation",
                 "rwr"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    struct Bound {
        std::string key;
        std::string value;
        CLI::Option* option = nullptr;
    };
    struct Command {
        Subcommand cmd;
        CLI::App* app = nullptr;
        std::deque<Bound> bound;
        std::string config;
        std::vector<std::string> overrides;
        std::string manifest;
        std::string log;
    };
    std::deque<Command> commands;

    for (auto cmd : {Subcommand::BuildData, Subcommand::Infer, Subcommand::Evaluate, Subcommand::Synth}) {
        auto& c = commands.emplace_back();
        c.cmd = cmd;
        c.app = app.add_subcommand(std::string(to_string(cmd)), description(cmd));
        for (const auto& f : flags_for(cmd)) {
            auto& b = c.bound.emplace_back();
            b.key = f.key;
            b.option = c.app->add_option(f.flag, b.value, std::string(f.help) + "  [" + f.key + "]");
        }
        c.app->add_option("--config", c.config, "key = value config file (or a previous run manifest)");
        c.app->add_option("--set", c.overrides, "Override any setting: key=value (repeatable)");
        c.app->add_option("--manifest", c.manifest, "Run manifest path (default <out>.manifest.json)");
        c.app->add_option("--log", c.log, "Append JSON-lines logs to this file");
    }

    std::string replay_manifest;
    std::vector<std::string> replay_overrides;
    auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest");
    replay->add_option("manifest", replay_manifest, "Manifest written by a previous run")->required();
    replay->add_option("--set", replay_overrides, "Override a setting: key=value (repeatable)");

    auto apply_overrides = [](Settings& s, const std::vector<std::string>& overrides) {
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--set", "expected key=value, got " + kv);
            s.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
    };

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    Subcommand cmd{};
    Settings settings;
    try {
        app.parse(reversed);
        if (replay->parsed()) {
            std::ifstream in(replay_manifest);
            if (!in) throw IoError("cannot open manifest " + replay_manifest);
            nlohmann::json m;
            try {
                m = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(1, e.what());
            }
            cmd = parse_subcommand(m.at("subcommand").get<std::string>());
            settings = Settings::from_json(m.at("settings"));
            apply_overrides(settings, replay_overrides);
        } else {
            for (auto& c : commands) {
                if (!c.app->parsed()) continue;
                cmd = c.cmd;
                settings = defaults(cmd);
                if (!c.config.empty()) settings.merge(load_config(c.config));
                for (const auto& b : c.bound) {
                    if (b.option->count() > 0) settings.set(b.key, b.value);
                }
                apply_overrides(settings, c.overrides);
                if (!c.manifest.empty()) settings.set("manifest", c.manifest);
                if (!c.log.empty()) settings.set("log", c.log);
            }
        }
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const auto* sub : app.get_subcommands()) target = sub;
        out << target->help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const CLI::App* target = &app;
        for (const auto* sub : app.get_subcommands()) target = sub;
        err << target->help();
        return 2;
    } catch (const Error& e) {
        err << e.to_json().dump() << '\n';
        return 1;
    }

    try {
        install_log_sink(settings, err);
        execute(cmd, settings, out);
        log::clear_sink();
        return 0;
    } catch (const Error& e) {
        log::clear_sink();
        err << e.to_json().dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
        return 1;
    } catch (const std::exception& e) {
        log::clear_sink();
        err << nlohmann::json{{"error", "InternalError"}, {"message", e.what()}}.dump(
                   -1, ' ', false, nlohmann::json::error_handler_t::replace)
            << '\n';
        return 1;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace rwr::cli
