#include "rwr/cli.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "rwr/corpus.hpp"
#include "rwr/digest.hpp"
#include "rwr/error.hpp"
#include "rwr/synthetic.hpp"
#include "temp_dir.hpp"

namespace rwr::cli {
namespace {

using testing::read_file;
using testing::TempDir;
using testing::write_file;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

nlohmann::json read_json(const std::filesystem::path& path) { return nlohmann::json::parse(read_file(path)); }

const char* kPipelineRules =
    "{\"match_contains\": \"Does the summary contain\", \"response\": \"Yes\"}\n"
    "{\"match_contains\": \"Reply with the indices\", \"response\": \"1\"}\n"
    "{\"match_contains\": \"\", \"response\": \"A relevant note.\"}\n";

void write_fixture_corpus(const std::filesystem::path& path, std::size_t n) {
    std::vector<Example> corpus;
    for (std::size_t i = 0; i < n; ++i) {
        const auto id = std::to_string(i);
        corpus.push_back({"c" + id, "Opening " + id + ".\n\nThe answer is V" + id + "X.\n\nClosing " + id + ".",
                          "Which value for " + id + "?", "V" + id + "X", {}});
    }
    write_examples(corpus, path);
}

TEST(Cli, SynthIsDeterministicAcrossRuns) {
    TempDir dir;
    const auto a = dir / "a.jsonl", b = dir / "b.jsonl";
    ASSERT_EQ(invoke({"synth", "--seed", "7", "--pairs", "5", "--units", "800", "--out", a.string()}).code, 0);
    ASSERT_EQ(invoke({"synth", "--seed", "7", "--pairs", "5", "--units", "800", "--out", b.string()}).code, 0);
    EXPECT_EQ(read_file(a), read_file(b));
    const auto ma = read_json(a.string() + ".manifest.json");
    const auto mb = read_json(b.string() + ".manifest.json");
    EXPECT_EQ(ma["outputs"]["io.out"]["sha256"], mb["outputs"]["io.out"]["sha256"]);
    EXPECT_EQ(ma["outputs"]["io.out"]["sha256"], sha256_file(a));
    EXPECT_EQ(ma["status"], "ok");
    EXPECT_EQ(ma["seed"], 7);
    EXPECT_EQ(ma["settings"]["synth.pairs"], "5");
    EXPECT_EQ(read_examples(a).size(), 5u);
}

TEST(Cli, UnknownFlagIsUsageError) {
    const auto r = invoke({"synth", "--bogus", "1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--pairs"), std::string::npos);
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_EQ(invoke({"frobnicate"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
    const auto r = invoke({"build-data", "--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("--mock-rules"), std::string::npos);
}

TEST(Cli, EvaluateWithoutBindingsIsDomainError) {
    TempDir dir;
    const auto input = dir / "in.jsonl";
    write_examples(eval::gen_synthetic_recall(1, 2, 100), input);
    const auto r = invoke({"evaluate", "--input", input.string(), "--predictions", input.string(), "--out",
                           (dir / "report.json").string()});
    EXPECT_EQ(r.code, 1);
    const auto err = nlohmann::json::parse(r.err.substr(r.err.rfind('{')));
    EXPECT_EQ(err["error"], "MissingBinding");
    EXPECT_EQ(read_json(dir / "report.json.manifest.json")["status"], "error");
}

TEST(Cli, MissingInputFileIsIoError) {
    TempDir dir;
    const auto r = invoke({"infer", "--input", (dir / "nope.jsonl").string(), "--out", (dir / "t.jsonl").string(),
                           "--mock-rules", (dir / "nope-rules.jsonl").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("IoError"), std::string::npos);
}

TEST(Config, ParsesSectionsQuotesAndComments) {
    const auto s = parse_config(
        "# top comment\n"
        "seed = 11\n"
        "[backend]\n"
        "url = \"http://localhost:8080/v1\"  # trailing\n"
        "parallelism=3\n"
        "[pipeline]\n"
        "refusal = \"say \\\"none\\\" # not a comment\"\n");
    EXPECT_EQ(s.get("seed"), "11");
    EXPECT_EQ(s.get("backend.url"), "http://localhost:8080/v1");
    EXPECT_EQ(s.get_int("backend.parallelism"), 3);
    EXPECT_EQ(s.get("pipeline.refusal"), "say \"none\" # not a comment");
    EXPECT_THROW(parse_config("novalue\n"), ParseError);
    EXPECT_THROW(parse_config("[broken\n"), ParseError);
    EXPECT_THROW(parse_config("k = \"open\n"), ParseError);
}

TEST(Config, Typed) {
    Settings s;
    s.set("n", "x");
    s.set("b", "yes");
    EXPECT_THROW(s.get_int("n"), InvalidArgument);
    EXPECT_THROW(s.get_double("n"), InvalidArgument);
    EXPECT_THROW(s.require("missing"), InvalidArgument);
    EXPECT_TRUE(s.get_bool("b"));
    s.set("backend.model", "m1");
    EXPECT_EQ(s.role_get("judge", "model"), "m1");
    s.set("judge.model", "m2");
    EXPECT_EQ(s.role_get("judge", "model"), "m2");
}

TEST(Config, LayeringDefaultsFileFlagsSet) {
    TempDir dir;
    const auto cfg = dir / "run.toml";
    write_file(cfg, "seed = 3\n[synth]\npairs = 4\nunits = 300\n");
    const auto out = dir / "c.jsonl";
    ASSERT_EQ(invoke({"synth", "--config", cfg.string(), "--pairs", "6", "--set", "synth.units=400", "--out",
                      out.string()})
                  .code,
              0);
    const auto m = read_json(out.string() + ".manifest.json");
    EXPECT_EQ(m["settings"]["seed"], "3");
    EXPECT_EQ(m["settings"]["synth.pairs"], "6");
    EXPECT_EQ(m["settings"]["synth.units"], "400");
    EXPECT_EQ(m["settings"]["synth.length_unit"], "words");
    EXPECT_EQ(read_file(out), [&] {
        std::string s;
        for (const auto& e : eval::gen_synthetic_recall(3, 6, 400)) s += example_to_line(e) + "\n";
        return s;
    }());
}

TEST(Cli, ReplayReproducesOutputBytes) {
    TempDir dir;
    const auto out = dir / "c.jsonl";
    ASSERT_EQ(invoke({"synth", "--seed", "9", "--pairs", "3", "--units", "200", "--out", out.string()}).code, 0);
    const auto original = read_file(out);
    std::filesystem::copy_file(out.string() + ".manifest.json", dir / "saved.json");
    std::filesystem::remove(out);
    ASSERT_EQ(invoke({"replay", (dir / "saved.json").string()}).code, 0);
    EXPECT_EQ(read_file(out), original);
    // A replay with overrides writes elsewhere and differs.
    const auto other = dir / "other.jsonl";
    ASSERT_EQ(invoke({"replay", (dir / "saved.json").string(), "--set", "io.out=" + other.string(), "--set", "seed=10"})
                  .code,
              0);
    EXPECT_NE(read_file(other), original);
}

TEST(Cli, BuildDataEndToEndIsDeterministic) {
    TempDir dir;
    write_fixture_corpus(dir / "corpus.jsonl", 12);
    write_file(dir / "rules.jsonl", kPipelineRules);
    std::vector<TrainingRecord> base;
    for (int i = 0; i < 5; ++i) base.push_back({"b" + std::to_string(i), RecordSource::Base, "in", "out"});
    write_records(base, dir / "base.jsonl");

    auto build = [&](const std::string& name, const std::string& parallelism) {
        return invoke({"build-data", "--corpus", (dir / "corpus.jsonl").string(), "--base",
                       (dir / "base.jsonl").string(), "--out", (dir / name).string(), "--seed", "42", "--mock-rules",
                       (dir / "rules.jsonl").string(), "--parallelism", parallelism, "--set", "pipeline.cot_count=20"});
    };
    ASSERT_EQ(build("a.jsonl", "1").code, 0);
    ASSERT_EQ(build("b.jsonl", "8").code, 0);
    EXPECT_EQ(read_file(dir / "a.jsonl"), read_file(dir / "b.jsonl"));
    EXPECT_EQ(read_file(dir / "a.jsonl.audit.json"), read_file(dir / "b.jsonl.audit.json"));

    const auto records = read_records(dir / "a.jsonl");
    EXPECT_EQ(records.size(), 25u);
    const auto audit = read_json(dir / "a.jsonl.audit.json");
    EXPECT_EQ(audit["admitted"]["valid_cot"], 10);
    EXPECT_EQ(audit["admitted"]["empty_cot"], 10);
    const auto manifest = read_json(dir / "a.jsonl.manifest.json");
    EXPECT_TRUE(manifest["inputs"].contains("backend.mock_rules"));
    EXPECT_EQ(manifest["outputs"]["io.audit"]["sha256"], sha256_file(dir / "a.jsonl.audit.json"));
}

TEST(Cli, InferThenEvaluate) {
    TempDir dir;
    const auto corpus = eval::gen_synthetic_recall(5, 3, 120);
    write_examples(corpus, dir / "in.jsonl");
    std::string rules;
    for (const auto& e : corpus) {
        rules += nlohmann::json{{"match_contains", "Question: " + e.query}, {"response", e.answer}}.dump() + "\n";
    }
    rules += "{\"match_contains\": \"\", \"response\": \"note\"}\n";
    write_file(dir / "rules.jsonl", rules);

    ASSERT_EQ(invoke({"infer", "--input", (dir / "in.jsonl").string(), "--out", (dir / "traces.jsonl").string(),
                      "--mock-rules", (dir / "rules.jsonl").string(), "--chunk-units", "50"})
                  .code,
              0);
    const auto lines = read_file(dir / "traces.jsonl");
    EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), 3);
    const auto first = nlohmann::json::parse(lines.substr(0, lines.find('\n')));
    EXPECT_EQ(first["mode"], "ssa");
    EXPECT_EQ(first["student_calls"], first["chunks"].size() + 1);

    write_file(dir / "bindings.json", "{\"synthetic_recall\": \"exact_match\"}");
    const auto r = invoke({"evaluate", "--input", (dir / "in.jsonl").string(), "--predictions",
                           (dir / "traces.jsonl").string(), "--bindings", (dir / "bindings.json").string(), "--out",
                           (dir / "report.json").string(), "--label", "RwR+SSA"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("RwR+SSA"), std::string::npos);
    const auto report = read_json(dir / "report.json");
    EXPECT_DOUBLE_EQ(report["weighted_avg"].get<double>(), 1.0);
}

TEST(MakeBackend, PrecedenceAndErrors) {
    TempDir dir;
    write_file(dir / "global.jsonl", "{\"match_contains\": \"\", \"response\": \"global\"}\n");
    write_file(dir / "judge.jsonl", "{\"match_contains\": \"\", \"response\": \"judge\"}\n");
    Settings s = defaults(Subcommand::Evaluate);
    EXPECT_THROW(make_backend(s, "judge"), InvalidArgument);
    s.set("backend.mock_rules", (dir / "global.jsonl").string());
    EXPECT_EQ(make_backend(s, "judge")->complete(ChatExchange::user("x")).text, "global");
    s.set("judge.url", "http://127.0.0.1:1");
    s.set("judge.mock_rules", (dir / "judge.jsonl").string());
    EXPECT_EQ(make_backend(s, "judge")->complete(ChatExchange::user("x")).text, "judge");
    EXPECT_EQ(make_backend(s, "student")->complete(ChatExchange::user("x")).text, "global");
    s.set("backend.temperature", "warm");
    EXPECT_THROW(make_backend(s, "student"), InvalidArgument);
}

}  // namespace
}  // namespace rwr::cli
