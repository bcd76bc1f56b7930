#include "cli.hpp"

#include <nlohmann/json.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("levyopt_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Result run(std::vector<std::string> args, const fs::path& out_dir = {}) {
        args.insert(args.begin(), {"--out", (out_dir.empty() ? dir_ : out_dir).string()});
        std::ostringstream out, err;
        Result r;
        r.code = levyopt::cli::run(args, out, err);
        r.out = out.str();
        r.err = err.str();
        return r;
    }

    static std::string model(const std::string& stem) { return std::string(LEVYOPT_MODELS_DIR) + "/" + stem + ".toml"; }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    json load(const std::string& stem, const std::string& file) { return json::parse(slurp(dir_ / stem / file)); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate", model("merton_diffusion")}).code, 2);
    EXPECT_EQ(run({"solve", "/nonexistent/model.toml"}).code, 2);
    EXPECT_EQ(run({"solve"}).code, 2);
    EXPECT_EQ(run({"--paths", "0", "simulate", model("merton_diffusion")}).code, 2);
}

TEST_F(Cli, ParseErrorsNameTheLine) {
    fs::create_directories(dir_);
    const fs::path bad = dir_ / "bad.toml";
    std::ofstream(bad) << "schema = 1\n[triplet]\nb = 0.1\n[problem]\np = 2.0\n";
    const auto r = run({"validate", bad.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 5"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("problem.p"), std::string::npos) << r.err;
}

TEST_F(Cli, ValidateEveryShippedModel) {
    for (const auto& entry : fs::directory_iterator(LEVYOPT_MODELS_DIR)) {
        if (entry.path().extension() != ".toml") continue;
        const auto r = run({"validate", entry.path().string()});
        EXPECT_EQ(r.code, 0) << entry.path() << "\n" << r.err;
        const auto stem = entry.path().stem().string();
        EXPECT_TRUE(fs::exists(dir_ / stem / "validate.json"));
        EXPECT_TRUE(fs::exists(dir_ / stem / "manifest.json"));
    }
}

TEST_F(Cli, ExtensionMayBeOmitted) {
    const std::string path = std::string(LEVYOPT_MODELS_DIR) + "/compound_poisson";
    EXPECT_EQ(run({"solve", path}).code, 0);
}

TEST_F(Cli, SolveWritesTheOptimum) {
    ASSERT_EQ(run({"solve", model("compound_poisson")}).code, 0);
    const auto j = load("compound_poisson", "solve.json");
    EXPECT_NEAR(j["solution"]["pi_hat"][0].get<double>(), 1.125, 1e-8);
    EXPECT_NEAR(j["solution"]["g_star"].get<double>(), 0.05, 1e-12);
    const auto m = load("compound_poisson", "manifest.json");
    EXPECT_EQ(m["command"], "solve");
    ASSERT_EQ(m["artifacts"].size(), 1u);
    const std::string bytes = slurp(dir_ / "compound_poisson" / "solve.json");
    EXPECT_EQ(m["artifacts"][0]["fnv1a"], levyopt::cli::fnv1a_hex(bytes));
    EXPECT_EQ(m["artifacts"][0]["bytes"].get<std::size_t>(), bytes.size());
}

TEST_F(Cli, ArtifactsAreReproducible) {
    const auto a = dir_ / "a", b = dir_ / "b";
    ASSERT_EQ(run({"--paths", "2000", "--seed", "3", "simulate", model("negative_jump")}, a).code, 0);
    ASSERT_EQ(run({"--paths", "2000", "--seed", "3", "simulate", model("negative_jump")}, b).code, 0);
    EXPECT_EQ(slurp(a / "negative_jump" / "simulate.csv"), slurp(b / "negative_jump" / "simulate.csv"));
    EXPECT_EQ(slurp(a / "negative_jump" / "manifest.json"), slurp(b / "negative_jump" / "manifest.json"));
    const auto c = dir_ / "c";
    ASSERT_EQ(run({"--paths", "2000", "--seed", "4", "simulate", model("negative_jump")}, c).code, 0);
    EXPECT_NE(slurp(a / "negative_jump" / "simulate.csv"), slurp(c / "negative_jump" / "simulate.csv"));
}

TEST_F(Cli, FnvKnownAnswers) {
    EXPECT_EQ(levyopt::cli::fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(levyopt::cli::fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST_F(Cli, NuipReportsTheWitness) {
    ASSERT_EQ(run({"nuip", model("increasing_jump_asset")}).code, 0);
    const auto j = load("increasing_jump_asset", "nuip.json");
    EXPECT_EQ(j["status"], "violated");
    EXPECT_TRUE(j["j_clauses"]["member"].get<bool>());
}

TEST_F(Cli, VerifyFailsOnArbitrage) {
    const auto r = run({"--paths", "1000", "verify", model("increasing_jump_asset")});
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(load("increasing_jump_asset", "verify.json")["passed"].get<bool>());
}

TEST_F(Cli, QmeasureOnTheBoundaryFixture) {
    ASSERT_EQ(run({"qmeasure", model("boundary_argmax")}).code, 0);
    const auto j = load("boundary_argmax", "qmeasure.json");
    EXPECT_FALSE(j["exists"].get<bool>());
}

TEST_F(Cli, ZeroPolicySimulation) {
    ASSERT_EQ(run({"--paths", "500", "--policy", "zero", "simulate", model("merton_diffusion")}).code, 0);
    EXPECT_TRUE(fs::exists(dir_ / "merton_diffusion" / "simulate.csv"));
}

TEST_F(Cli, PolicyFile) {
    fs::create_directories(dir_);
    const fs::path policy = dir_ / "policy.json";
    std::ofstream(policy) << R"({"pi": [2.0]})";
    EXPECT_EQ(run({"--paths", "500", "--policy", "file", "--policy-file", policy.string(), "simulate",
                   model("merton_diffusion")})
                  .code,
              0);
    EXPECT_EQ(run({"--paths", "500", "--policy", "file", "simulate", model("merton_diffusion")}).code, 2);
    const fs::path bad = dir_ / "bad.json";
    for (const char* text : {R"({"kappa": 0.1})", R"({"pi": "two"})", R"([1, 2])"}) {
        std::ofstream(bad) << text;
        EXPECT_EQ(run({"--paths", "500", "--policy", "file", "--policy-file", bad.string(), "simulate",
                       model("merton_diffusion")})
                      .code,
                  2)
            << text;
    }
}
