#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const char* kTiny = R"([generator]
seed = 5
first = 2022-01-01
last = 2022-08-31
markets = 1
[model]
temporal_channels = 2
closure_channels = 2
season_channels = 2
decoder_channels = 2
deep_layers = 1
decoder_layers = 1
[train]
epochs = 2
patience = 1
)";

struct Result {
    int code;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    static fs::path work;

    static void SetUpTestSuite() {
        work = fs::temp_directory_path() / ("skycast-cli-" + std::to_string(::getpid()));
        fs::remove_all(work);
        fs::create_directories(work);
        std::ofstream(work / "tiny.conf") << kTiny;
        std::ofstream(work / "bad.conf") << "[train]\nepochz = 3\n";
        std::ofstream(work / "broken.json") << "{\"variant\": ";
        ASSERT_EQ(run("generate --config " + conf() + " --out " + (work / "data").string()).code, 0);
        ASSERT_EQ(run("prepare --config " + conf() + " --dataset " + (work / "data").string() + " --out " +
                      (work / "prep").string())
                      .code,
                  0);
    }
    static void TearDownTestSuite() { fs::remove_all(work); }

    static std::string conf() { return (work / "tiny.conf").string(); }

    static Result run(const std::string& args, const std::string& env = "") {
        const fs::path err = work / "stderr.txt";
        const std::string cmd = env + " " + SKYCAST_CLI_PATH + " " + args + " >/dev/null 2>" + err.string();
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
    }
};

fs::path Cli::work;

nlohmann::json error_of(const Result& r) {
    return nlohmann::json::parse(r.err.substr(r.err.find('{')))["error"];
}

}  // namespace

TEST_F(Cli, UnknownConfigKeyIsConfigError) {
    const auto r = run("generate --config " + (work / "bad.conf").string() + " --out " + (work / "x").string());
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(error_of(r)["category"], "configuration");
}

TEST_F(Cli, BadFlagIsUsageError) {
    EXPECT_EQ(run("train --no-such-flag").code, 2);
    EXPECT_EQ(run("").code, 2);
}

TEST_F(Cli, MissingDatasetIsInputError) {
    const fs::path out = work / "prep_missing";
    const auto r = run("prepare --config " + conf() + " --dataset " + (work / "nope").string() + " --out " +
                       out.string());
    EXPECT_EQ(r.code, 3);
    EXPECT_EQ(error_of(r)["category"], "missing/invalid input");
    const auto meta = nlohmann::json::parse(slurp(out / "run_metadata.prepare.json"));
    EXPECT_EQ(meta["status"], "failed");
}

TEST_F(Cli, CorruptedCheckpointIsInputError) {
    const auto r = run("trend --config " + conf() + " --prepared " + (work / "prep").string() + " --checkpoint " +
                       (work / "broken.json").string() + " --out " + (work / "trend").string());
    EXPECT_EQ(r.code, 3);
    EXPECT_EQ(error_of(r)["category"], "missing/invalid input");
}

TEST_F(Cli, SeedPrecedence) {
    const fs::path a = work / "seed_a", b = work / "seed_b";
    ASSERT_EQ(run("generate --config " + conf() + " --out " + a.string(), "SKYCAST_SEED=44").code, 0);
    ASSERT_EQ(run("generate --config " + conf() + " --seed 45 --out " + b.string(), "SKYCAST_SEED=44").code, 0);
    const auto ma = nlohmann::json::parse(slurp(a / "run_metadata.generate.json"));
    const auto mb = nlohmann::json::parse(slurp(b / "run_metadata.generate.json"));
    EXPECT_EQ(ma["seeds"]["generator"], 44);
    EXPECT_EQ(ma["seed_source"], "SKYCAST_SEED");
    EXPECT_EQ(mb["seeds"]["generator"], 45);
    EXPECT_EQ(mb["seed_source"], "--seed");
    EXPECT_EQ(mb["status"], "ok");
}
