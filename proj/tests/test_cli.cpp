#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wmauth/cli.hpp"

using namespace wmauth;

namespace {

struct Run {
    int code = 0;
    std::string out;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "wmauth");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream captured;
    auto* old_out = std::cout.rdbuf(captured.rdbuf());
    std::ostringstream err;
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    const int code = cli_main(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    return {code, captured.str()};
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("wmauth_cli_" + name);
    std::filesystem::remove_all(p);
    return p;
}

} // namespace

TEST(Cli, Pfa) {
    const auto r = run({"pfa"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "1.139e-10\n");
    EXPECT_EQ(run({"pfa", "--threshold", "2"}).out, "5.000e-01\n");
}

TEST(Cli, Degradation) {
    const auto r = run({"degradation", "--n", "1023", "--r", "21"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "-0.364\n");
    EXPECT_EQ(run({"degradation", "--r", "512"}).code, 2);
}

TEST(Cli, MinR) {
    const auto r = run({"min-r", "--config", std::string(WMAUTH_CONFIG_DIR) + "/design.cfg"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "21\n");
}

TEST(Cli, PmdCurveCsv) {
    const auto path = scratch("pmd.csv");
    const auto r = run({"pmd-curve", "--out", path.string()});
    EXPECT_EQ(r.code, 0);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "s,pmd,log2_pmd");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::istringstream is(line);
        std::string s, pmd, lg;
        std::getline(is, s, ',');
        std::getline(is, pmd, ',');
        std::getline(is, lg, ',');
        EXPECT_EQ(std::stoul(s), rows);
        EXPECT_LT(std::stod(lg), -32.0) << line;
        ++rows;
    }
    EXPECT_EQ(rows, 1024u);
}

TEST(Cli, GenCode) {
    const auto r = run({"gen-code", "--family", "1"});
    EXPECT_EQ(r.code, 0);
    std::istringstream in(r.out);
    EXPECT_EQ(read_code(in), generate_base_code(1, 1023));
    EXPECT_EQ(run({"gen-code", "--family", "40"}).code, 2);
    EXPECT_EQ(run({"gen-code", "--family", "0", "--n", "127", "--r", "5"}).code, 0);
}

TEST(Cli, GenMask) {
    const auto r = run({"gen-mask", "--seed", "000102030405060708090a0b0c0d0e0f", "--epochs", "3", "--start", "7"});
    EXPECT_EQ(r.code, 0);
    std::ostringstream want;
    const auto key = parse_hex("000102030405060708090a0b0c0d0e0f");
    for (std::uint64_t e = 7; e < 10; ++e) write_mask_line(want, e, derive_mask(Seed{key, e}, WatermarkParams{}));
    EXPECT_EQ(r.out, want.str());
    EXPECT_EQ(run({"gen-mask", "--seed", "0102"}).code, 2);
    EXPECT_EQ(run({"gen-mask", "--seed", "zz"}).code, 2);
}

TEST(Cli, ConfigErrorsExitTwo) {
    const auto bad = scratch("bad.cfg");
    std::ofstream(bad) << "[watermark]\nbogus = 1\n";
    EXPECT_EQ(run({"pfa", "--config", bad.string()}).code, 2);
    EXPECT_EQ(run({"pfa", "--config", "/nonexistent.cfg"}).code, 2);
    EXPECT_EQ(run({"pfa", "--n", "abc"}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"authentic-run"}).code, 2); // --out-dir is required
}

TEST(Cli, AuthenticAndSpoofRuns) {
    const auto cfg = scratch("run.cfg");
    std::ofstream(cfg) << "[campaign]\nduration_s = 0.2\nw_override = 20\nstrategies = 0 1023\n";
    const auto dir = scratch("run_out");
    auto r = run({"spoof-run", "--config", cfg.string(), "--out-dir", dir.string()});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("30 decisions", 0), 0u) << r.out;
    for (const char* f : {"decisions.csv", "ellipses.csv", "predicted.csv"}) EXPECT_TRUE(std::filesystem::exists(dir / f));

    std::ifstream first(dir / "decisions.csv");
    std::stringstream a;
    a << first.rdbuf();
    const auto dir2 = scratch("run_out2");
    EXPECT_EQ(run({"spoof-run", "--config", cfg.string(), "--out", dir2.string()}).code, 0);
    std::ifstream second(dir2 / "decisions.csv");
    std::stringstream b;
    b << second.rdbuf();
    EXPECT_EQ(a.str(), b.str());

    r = run({"authentic-run", "--config", cfg.string(), "--out-dir", dir.string(), "--cn0", "45"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "10 decisions, 10 authentic, W=20\n");

    // Sample dumps need sample-level synthesis.
    EXPECT_EQ(run({"authentic-run", "--config", cfg.string(), "--out-dir", dir.string(), "--dump-samples",
                   (dir / "raw").string()})
                  .code,
              2);
}

TEST(Cli, DumpSamples) {
    const auto cfg = scratch("dump.cfg");
    std::ofstream(cfg) << "[campaign]\nduration_s = 0.01\nw_override = 5\nfidelity = samples\n";
    const auto dir = scratch("dump_out");
    const auto base = (dir / "raw").string();
    std::filesystem::create_directories(dir);
    EXPECT_EQ(run({"authentic-run", "--config", cfg.string(), "--out-dir", dir.string(), "--dump-samples", base}).code,
              0);
    EXPECT_EQ(std::filesystem::file_size(base + ".f32"), 10u * 2046u * 4u);
    std::ifstream side(base + ".txt");
    double F = 0, T = 0;
    std::size_t n = 0, epochs = 0;
    side >> F >> T >> n >> epochs;
    EXPECT_EQ(epochs, 10u);
}
