#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end checks of the command-line surface. The binary path arrives via
// the IPP_CLI environment variable set by CTest.

namespace {

namespace fs = std::filesystem;

std::string cliPath() {
    if (const char* env = std::getenv("IPP_CLI")) return env;
    // Direct invocation outside CTest: look next to this test binary.
    std::error_code ec;
    const auto self = fs::read_symlink("/proc/self/exe", ec);
    if (!ec) {
        const auto candidate = self.parent_path().parent_path() / "tools" / "ipp";
        if (fs::exists(candidate)) return candidate.string();
    }
    return "";
}

int runCli(const std::string& args) {
    const std::string cmd = cliPath() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "ipp_cli_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("cli pipeline", "[cli]") {
    REQUIRE_FALSE(cliPath().empty());
    TempDir dir;

    SECTION("gen-data is deterministic and reruns are byte-identical") {
        REQUIRE(runCli("gen-data --preset tutorial --out " + dir.str("a.csv")) == 0);
        REQUIRE(runCli("gen-data --preset tutorial --out " + dir.str("b.csv")) == 0);
        const auto a = slurp(dir.str("a.csv"));
        CHECK_FALSE(a.empty());
        CHECK(a == slurp(dir.str("b.csv")));

        REQUIRE(runCli("gen-data --n-plus 3 --n-minus 0 --seed 5 --out " +
                       dir.str("c.csv")) == 0);
        std::ifstream in(dir.str("c.csv"));
        std::string line;
        int rows = 0;
        while (std::getline(in, line)) ++rows;
        CHECK(rows == 3);
    }

    SECTION("bad covariance exits with a data error") {
        CHECK(runCli("gen-data --cov-plus 1,5,1 --out " + dir.str("x.csv")) == 3);
    }

    SECTION("usage errors exit with code 2") {
        CHECK(runCli("train") == 2);
        CHECK(runCli("no-such-command") == 2);
        CHECK(runCli("gen-data --preset nope --out x.csv") == 2);
    }

    SECTION("train, grid, estimate, calibrate") {
        REQUIRE(runCli("gen-data --preset tutorial --out " + dir.str("tut.csv")) == 0);

        REQUIRE(runCli("train --data " + dir.str("tut.csv") +
                       " --c-plus 20 --c-minus 20 --out " + dir.str("m.model")) == 0);
        CHECK(fs::exists(dir.str("m.model")));

        REQUIRE(runCli("grid --data " + dir.str("tut.csv") +
                       " --c-plus 20 --c-minus 20 -K 9 --out-dir " + dir.str("g") +
                       " --threads 2") == 0);
        REQUIRE(fs::exists(dir.str("g") + "/grid.grid"));

        REQUIRE(runCli("estimate --grid " + dir.str("g") + "/grid.grid --data " +
                       dir.str("tut.csv") + " --out " + dir.str("est.csv") +
                       " --votes-out " + dir.str("votes.csv") + " --degeneracy-out " +
                       dir.str("deg.csv")) == 0);
        const auto est = slurp(dir.str("est.csv"));
        CHECK(est.rfind("id,value,positiveVotes,onPlaneCount,degenerate", 0) == 0);
        CHECK(fs::exists(dir.str("votes.csv")));
        CHECK(fs::exists(dir.str("deg.csv")));

        REQUIRE(runCli("calibrate --labels-from " + dir.str("tut.csv") + " --implied " +
                       dir.str("est.csv") + ":1 --out-prefix " + dir.str("cal")) == 0);
        CHECK(fs::exists(dir.str("cal_summary.txt")));
        CHECK(fs::exists(dir.str("cal_report.csv")));
        CHECK(fs::exists(dir.str("cal_implied_roc.csv")));
    }

    SECTION("calibrate on perfect estimates reports score zero") {
        {
            std::ofstream data(dir.str("perfect_data.csv"));
            std::ofstream scores(dir.str("perfect_scores.csv"));
            for (int i = 0; i < 20; ++i) {
                const int label = i < 10 ? 1 : -1;
                data << label << ',' << i << '\n';
                scores << (label > 0 ? 1.0 : 0.0) << '\n';
            }
        }
        REQUIRE(runCli("calibrate --labels-from " + dir.str("perfect_data.csv") +
                       " --implied " + dir.str("perfect_scores.csv") +
                       ":0 --out-prefix " + dir.str("perfect")) == 0);
        const auto summary = slurp(dir.str("perfect_summary.txt"));
        CHECK(summary.find("calibration_score_implied = 0\n") != std::string::npos);
        CHECK(summary.find("auc_implied = 1\n") != std::string::npos);
    }

    SECTION("calibrate with mismatched lengths fails") {
        {
            std::ofstream data(dir.str("d.csv"));
            data << "1,0.5\n-1,0.7\n";
            std::ofstream scores(dir.str("s.csv"));
            scores << "0.5\n0.25\n0.75\n";
        }
        CHECK(runCli("calibrate --labels-from " + dir.str("d.csv") + " --implied " +
                     dir.str("s.csv") + ":0 --out-prefix " + dir.str("bad")) == 3);
    }

    SECTION("compare tutorial preset and determinism") {
        REQUIRE(runCli("gen-data --preset tutorial --out " + dir.str("tut.csv")) == 0);
        const std::string cmd = "compare --train " + dir.str("tut.csv") + " --test " +
                                dir.str("tut.csv") + " --preset tutorial --out-dir ";
        REQUIRE(runCli(cmd + dir.str("out1")) == 0);
        REQUIRE(runCli(cmd + dir.str("out2")) == 0);
        for (const char* name :
             {"summary.txt", "report.csv", "estimates.csv", "votes.csv"}) {
            CHECK(fs::exists(dir.path / "out1" / name));
            CHECK(slurp(dir.path / "out1" / name) == slurp(dir.path / "out2" / name));
        }
        const auto summary = slurp(dir.path / "out1" / "summary.txt");
        CHECK(summary.find("K = 9") != std::string::npos);
        CHECK(summary.find("calibration_score_raw = ") != std::string::npos);
        CHECK(summary.find("calibration_score_platt = ") != std::string::npos);
        CHECK(summary.find("calibration_score_implied = ") != std::string::npos);
        CHECK(summary.find("auc_platt = ") != std::string::npos);
        CHECK(summary.find("auc_implied = ") != std::string::npos);
    }

    SECTION("compare equals the individual commands run in sequence") {
        REQUIRE(runCli("gen-data --preset tutorial --out " + dir.str("tut.csv")) == 0);
        REQUIRE(runCli("compare --train " + dir.str("tut.csv") + " --test " +
                       dir.str("tut.csv") +
                       " --preset tutorial --out-dir " + dir.str("cmp")) == 0);

        REQUIRE(runCli("grid --data " + dir.str("tut.csv") +
                       " --kernel linear --c-plus 20 --c-minus 20 -K 9"
                       " --mode balanced --out-dir " + dir.str("steps")) == 0);
        REQUIRE(runCli("estimate --grid " + dir.str("steps") + "/grid.grid --data " +
                       dir.str("tut.csv") + " --out " + dir.str("steps/est.csv")) == 0);
        REQUIRE(runCli("calibrate --labels-from " + dir.str("tut.csv") + " --implied " +
                       dir.str("steps/est.csv") + ":1 --out-prefix " +
                       dir.str("steps/cal")) == 0);

        const auto compareSummary = slurp(dir.path / "cmp" / "summary.txt");
        const auto stepSummary = slurp(dir.str("steps/cal_summary.txt"));
        auto valueOf = [](const std::string& text, const std::string& key) {
            const auto pos = text.find(key + " = ");
            REQUIRE(pos != std::string::npos);
            const auto end = text.find('\n', pos);
            return text.substr(pos + key.size() + 3, end - pos - key.size() - 3);
        };
        CHECK(valueOf(compareSummary, "calibration_score_implied") ==
              valueOf(stepSummary, "calibration_score_implied"));
        CHECK(valueOf(compareSummary, "auc_implied") ==
              valueOf(stepSummary, "auc_implied"));
    }

    SECTION("compare in exact mode on unbalanced data") {
        REQUIRE(runCli("gen-data --n-plus 14 --n-minus 26 --seed 3 --out " +
                       dir.str("unb.csv")) == 0);
        REQUIRE(runCli("compare --train " + dir.str("unb.csv") + " --test " +
                       dir.str("unb.csv") +
                       " --kernel rbf --gamma 0.7 --c-plus 4 --c-minus 2 -K 7"
                       " --no-scale --out-dir " + dir.str("unb_out")) == 0);
        const auto summary = slurp(dir.path / "unb_out" / "summary.txt");
        // c-plus != c-minus resolves the auto mode to the exact budget scheme.
        CHECK(summary.find("mode = exact") != std::string::npos);
        const auto manifest = slurp(dir.path / "unb_out" / "grid.grid");
        CHECK(manifest.find("mode exact") != std::string::npos);
        CHECK(manifest.find("K 7") != std::string::npos);
    }

    SECTION("missing input file exits with a data error") {
        CHECK(runCli("compare --train missing.csv --test missing.csv") == 3);
        CHECK(runCli("train --data missing.csv --out m.model") == 3);
    }

    SECTION("iteration cap exits with the non-convergence code") {
        REQUIRE(runCli("gen-data --preset tutorial --out " + dir.str("tut.csv")) == 0);
        CHECK(runCli("train --data " + dir.str("tut.csv") +
                     " --max-iter 1 --tol 1e-9 --out " + dir.str("m.model")) == 4);
    }

    SECTION("config file values are overridden by flags") {
        REQUIRE(runCli("gen-data --preset tutorial --out " + dir.str("tut.csv")) == 0);
        {
            std::ofstream config(dir.str("run.cfg"));
            config << "grid.data=" << dir.str("tut.csv") << "\n";
            config << "grid.c-plus=20\ngrid.c-minus=20\ngrid.levels=3\n";
            config << "grid.out-dir=" << dir.str("gcfg") << "\n";
        }
        REQUIRE(runCli("grid --config " + dir.str("run.cfg")) == 0);
        CHECK(slurp(dir.str("gcfg") + "/grid.grid").find("K 3") != std::string::npos);

        REQUIRE(runCli("grid --config " + dir.str("run.cfg") + " -K 5 --out-dir " +
                       dir.str("gcfg2")) == 0);
        CHECK(slurp(dir.str("gcfg2") + "/grid.grid").find("K 5") != std::string::npos);
    }

    SECTION("roc command") {
        {
            std::ofstream data(dir.str("d.csv"));
            data << "1,0\n1,1\n-1,2\n-1,3\n";
            std::ofstream scores(dir.str("s.csv"));
            scores << "0.9\n0.8\n0.2\n0.1\n";
        }
        REQUIRE(runCli("roc --labels-from " + dir.str("d.csv") + " --scores " +
                       dir.str("s.csv") + ":0 --out " + dir.str("roc.csv") +
                       " --svg") == 0);
        const auto roc = slurp(dir.str("roc.csv"));
        CHECK(roc.rfind("falsePositiveRate,truePositiveRate", 0) == 0);
        CHECK(fs::exists(dir.str("roc.csv") + ".svg"));
    }
}
