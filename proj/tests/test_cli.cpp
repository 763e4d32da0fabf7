#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <string>

#include "test_helpers.hpp"

using aed::test::TempDir;

namespace {

std::string cli_bin() {
    const char* env = std::getenv("AED_CLI_BIN");
    REQUIRE_MESSAGE(env != nullptr, "AED_CLI_BIN must point at the aed executable");
    return env;
}

struct CmdResult {
    int exit_code = -1;
    std::string stdout_text;
    std::string stderr_text;
};

CmdResult run_cmd(const std::string& args, const TempDir& dir) {
    const std::string out = dir.str("stdout.txt");
    const std::string err = dir.str("stderr.txt");
    const std::string cmd = cli_bin() + " " + args + " >" + out + " 2>" + err;
    const int status = std::system(cmd.c_str());
    CmdResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream of(out);
    r.stdout_text.assign((std::istreambuf_iterator<char>(of)), std::istreambuf_iterator<char>());
    std::ifstream ef(err);
    r.stderr_text.assign((std::istreambuf_iterator<char>(ef)), std::istreambuf_iterator<char>());
    return r;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    REQUIRE_MESSAGE(f.good(), ("missing file: " + path).c_str());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream f(path);
    f << body;
}

const char* kSpecJson = R"({
  "classes": [
    {"name": "tone_lo", "generator": "tone", "params": {"freq_lo_hz": 300, "freq_hi_hz": 520}},
    {"name": "tone_hi", "generator": "tone", "params": {"freq_lo_hz": 900, "freq_hi_hz": 1500}}
  ],
  "n_labeled_per_class": 20,
  "n_unlabeled": 60,
  "clip_duration_s": 0.4,
  "mismatch": {"snr_db": 10.0, "gain_jitter_db": 3.0, "bandlimit_hz": null},
  "distractor_fraction": 0.3,
  "seed": 42
})";

std::string base_config(const TempDir& dir, const std::string& run_name) {
    return std::string(R"({
  "labeled_manifest": ")") +
           dir.str("corpus/labeled.jsonl") + R"(",
  "unlabeled_manifest": ")" + dir.str("corpus/unlabeled.jsonl") + R"(",
  "output_dir": ")" + dir.str(run_name) + R"(",
  "detector": "svm",
  "criterion": "clarity",
  "clarity_theta_pos": 0.5,
  "clarity_theta_neg": -0.5,
  "cap": 5,
  "max_iterations": 1,
  "vocab_m": 8,
  "seed": 7
})";
}

// wall_time_s values vary run to run; everything else must be stable
std::string strip_wall_times(const std::string& text) {
    static const std::regex re("\"wall_time_s\": [0-9.e+-]+");
    return std::regex_replace(text, re, "\"wall_time_s\": 0");
}

} // namespace

TEST_CASE("synth + features + vocab + baseline smoke run") {
    TempDir dir("cli_smoke");
    write_file(dir.str("spec.json"), kSpecJson);

    CHECK(run_cmd("synth " + dir.str("spec.json") + " " + dir.str("corpus"), dir).exit_code == 0);
    CHECK(run_cmd("features " + dir.str("corpus/labeled.jsonl") + " " + dir.str("cache"), dir)
              .exit_code == 0);
    const CmdResult vocab = run_cmd("vocab " + dir.str("corpus/labeled.jsonl") + " " +
                                        dir.str("vocab.json") + " --m 8 --cache " + dir.str("cache"),
                                    dir);
    CHECK(vocab.exit_code == 0);
    CHECK(vocab.stdout_text.find("M=8") != std::string::npos);

    write_file(dir.str("cfg.json"), base_config(dir, "run_base"));
    const CmdResult baseline = run_cmd("baseline --config " + dir.str("cfg.json"), dir);
    CHECK(baseline.exit_code == 0);
    CHECK(baseline.stdout_text.find("mean AP") != std::string::npos);

    const std::string report = read_file(dir.str("run_base/report.json"));
    CHECK(report.find("tone_lo") != std::string::npos);
    CHECK(report.find("per_fold") != std::string::npos);
    CHECK(read_file(dir.str("run_base/report.txt")).find("Mean AP") != std::string::npos);
}

TEST_CASE("selftrain with max_iterations 1 writes exactly two history records") {
    TempDir dir("cli_two_records");
    write_file(dir.str("spec.json"), kSpecJson);
    REQUIRE(run_cmd("synth " + dir.str("spec.json") + " " + dir.str("corpus"), dir).exit_code == 0);
    write_file(dir.str("cfg.json"), base_config(dir, "run1"));

    const CmdResult r = run_cmd("selftrain --config " + dir.str("cfg.json"), dir);
    CHECK(r.exit_code == 0);
    const std::string history = read_file(dir.str("run1/run.history.json"));
    CHECK(std::count(history.begin(), history.end(), '\n') > 0);
    // exactly two records: baseline plus one iteration
    std::size_t count = 0;
    for (std::size_t pos = 0; (pos = history.find("\"iteration\"", pos)) != std::string::npos;
         ++pos) {
        ++count;
    }
    CHECK(count == 2);
}

TEST_CASE("unknown config keys are rejected by name with exit code 1") {
    TempDir dir("cli_badkey");
    write_file(dir.str("spec.json"), kSpecJson);
    REQUIRE(run_cmd("synth " + dir.str("spec.json") + " " + dir.str("corpus"), dir).exit_code == 0);

    std::string cfg = base_config(dir, "runx");
    cfg.insert(cfg.rfind('}'), R"(,
  "treshold": 0.95)");
    write_file(dir.str("cfg.json"), cfg);

    const CmdResult r = run_cmd("selftrain --config " + dir.str("cfg.json"), dir);
    CHECK(r.exit_code == 1);
    CHECK(r.stderr_text.find("treshold") != std::string::npos);
}

TEST_CASE("missing required keys are reported by name") {
    TempDir dir("cli_missing");
    write_file(dir.str("cfg.json"), R"({"output_dir": "x"})");
    const CmdResult r = run_cmd("baseline --config " + dir.str("cfg.json"), dir);
    CHECK(r.exit_code == 1);
    CHECK(r.stderr_text.find("labeled_manifest") != std::string::npos);
}

TEST_CASE("re-running with the same seed is idempotent up to timestamps") {
    TempDir dir("cli_idem");
    write_file(dir.str("spec.json"), kSpecJson);
    REQUIRE(run_cmd("synth " + dir.str("spec.json") + " " + dir.str("corpus"), dir).exit_code == 0);

    write_file(dir.str("cfg_a.json"), base_config(dir, "run_a"));
    write_file(dir.str("cfg_b.json"), base_config(dir, "run_b"));
    REQUIRE(run_cmd("selftrain --config " + dir.str("cfg_a.json"), dir).exit_code == 0);
    REQUIRE(run_cmd("selftrain --config " + dir.str("cfg_b.json"), dir).exit_code == 0);

    CHECK(strip_wall_times(read_file(dir.str("run_a/run.history.json"))) ==
          strip_wall_times(read_file(dir.str("run_b/run.history.json"))));
    CHECK(read_file(dir.str("run_a/report_baseline.json")) ==
          read_file(dir.str("run_b/report_baseline.json")));
    CHECK(read_file(dir.str("run_a/report_best.json")) ==
          read_file(dir.str("run_b/report_best.json")));
    CHECK(read_file(dir.str("run_a/models/best/tone_lo_fold1.json")) ==
          read_file(dir.str("run_b/models/best/tone_lo_fold1.json")));

    SUBCASE("report command diffs the two runs") {
        const CmdResult r =
            run_cmd("report " + dir.str("run_a") + " " + dir.str("run_b") + " --out " +
                        dir.str("diff"),
                    dir);
        CHECK(r.exit_code == 0);
        CHECK(r.stdout_text.find("Mean AP") != std::string::npos);
        CHECK(read_file(dir.str("diff/diff.txt")).find("+0.0") != std::string::npos);
        CHECK(read_file(dir.str("diff/diff.json")).find("mean_delta") != std::string::npos);
    }
}

TEST_CASE("validation failures in inputs exit with code 1") {
    TempDir dir("cli_badmanifest");
    write_file(dir.str("bad.jsonl"),
               R"({"id":"a","path":"a.wav","label":"x","fold":1,"source":"labeled"})"
               "\n"
               R"({"id":"a","path":"b.wav","label":"x","fold":2,"source":"labeled"})"
               "\n");
    write_file(dir.str("cfg.json"), std::string(R"({
  "labeled_manifest": ")") + dir.str("bad.jsonl") +
                                        R"(",
  "output_dir": ")" + dir.str("out") + R"("
})");
    const CmdResult r = run_cmd("baseline --config " + dir.str("cfg.json"), dir);
    CHECK(r.exit_code == 1);
    CHECK(r.stderr_text.find("duplicate") != std::string::npos);
}
