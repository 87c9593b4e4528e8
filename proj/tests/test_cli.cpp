#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "clrg/game.hpp"
#include "clrg/io.hpp"

#include <json.hpp>

namespace fs = std::filesystem;
using namespace clrg;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CLRG_BIN) + " " + args;
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "clrg_cli_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("simulate writes one row per draw per environment") {
    const fs::path csv = work_dir() / "sim.csv";
    REQUIRE(run_cli("simulate --preset F-HOM --p 5 --q 5 --n 1000 --seed 7 --out " +
                    csv.string()) == 0);
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "env,y,x1,x2,x3,x4,x5,x6,x7,x8,x9,x10");
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2000);
}

TEST_CASE("solve reproduces in-process empirical moments through the CSV") {
    const fs::path csv = work_dir() / "roundtrip.csv";
    REQUIRE(run_cli("simulate --preset F-HOM --p 1 --q 1 --n 500 --seed 3 --out " +
                    csv.string()) == 0);
    const fs::path out = work_dir() / "solve.json";
    REQUIRE(run_cli("solve --in " + csv.string() + " --w-sup 2 --out " + out.string()) == 0);

    const nlohmann::json j = nlohmann::json::parse(slurp(out));
    REQUIRE(j.contains("w1_star"));
    REQUIRE(j.contains("w2_star"));
    REQUIRE(j.contains("ensemble"));
    REQUIRE(j.contains("strategies"));
    REQUIRE(j.contains("u_set"));
    REQUIRE(j.contains("v_set"));
    REQUIRE(j.contains("stability"));

    const std::vector<EnvSample> samples = read_samples_csv(csv.string());
    REQUIRE(samples.size() == 2);
    const Vector w1 = least_squares(moments_from_sample(samples[0])).w_star;
    const Vector w2 = least_squares(moments_from_sample(samples[1])).w_star;
    const Vector j1 = j["w1_star"].get<Vector>();
    const Vector j2 = j["w2_star"].get<Vector>();
    CHECK(norm_inf(sub(j1, w1)) <= 1e-12);
    CHECK(norm_inf(sub(j2, w2)) <= 1e-12);
    const Vector ens = j["ensemble"].get<Vector>();
    CHECK(norm_inf(sub(ens, nash_ensemble(w1, w2))) <= 1e-12);
}

TEST_CASE("trace emits per-round CSV and an SVG chart") {
    const fs::path csv = work_dir() / "trace_in.csv";
    REQUIRE(run_cli("simulate --preset F-HOM --p 1 --q 1 --n 400 --seed 5 --out " +
                    csv.string()) == 0);
    const fs::path trace_csv = work_dir() / "trace.csv";
    const fs::path svg = work_dir() / "trace.svg";
    REQUIRE(run_cli("trace --in " + csv.string() + " --dynamic exact --w-sup 2 --out " +
                    trace_csv.string() + " --svg " + svg.string() + " 2>/dev/null") == 0);
    std::ifstream in(trace_csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "round,env,component,value");
    const std::string chart = slurp(svg);
    CHECK(chart.find("<svg") == 0);
    CHECK(chart.find("</svg>") != std::string::npos);
}

TEST_CASE("bench writes the report CSV with one row per method and size") {
    const fs::path csv = work_dir() / "bench.csv";
    REQUIRE(run_cli("bench --setting F-HOM --p 1 --q 1 --sizes 30,60 --trials 2 "
                    "--methods CLRG_EXACT,ERM,ORACLE --seed 1 --out " +
                    csv.string()) == 0);
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "setting,method,n,mean_error,stderr,trials");
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 6);
}

TEST_CASE("bench output is identical across thread budgets") {
    const fs::path a = work_dir() / "bench_t1.csv";
    const fs::path b = work_dir() / "bench_t4.csv";
    REQUIRE(run_cli("bench --setting F-HET --p 1 --q 1 --sizes 30,60 --trials 3 "
                    "--methods CLRG_EXACT,ERM --seed 9 --out " +
                    a.string() + " 2>/dev/null") == 0);
    const std::string cmd = "CLRG_THREADS=4 " + std::string(CLRG_BIN) +
                            " bench --setting F-HET --p 1 --q 1 --sizes 30,60 --trials 3 "
                            "--methods CLRG_EXACT,ERM --seed 9 --out " +
                            b.string();
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("verify passes") { CHECK(run_cli("verify --seed 4 > /dev/null") == 0); }

TEST_CASE("usage errors exit with 1 and numerical errors with 2") {
    CHECK(run_cli("frobnicate 2>/dev/null") == 1);
    CHECK(run_cli("solve 2>/dev/null") == 1);  // missing required --in
    // Realizability failure surfaces as a numerical error naming the assumption.
    const fs::path csv = work_dir() / "tight.csv";
    REQUIRE(run_cli("simulate --preset F-HOM --p 1 --q 1 --n 300 --seed 8 --out " +
                    csv.string()) == 0);
    const fs::path err = work_dir() / "err.txt";
    CHECK(run_cli("solve --in " + csv.string() + " --w-sup 0.0001 2> " + err.string()) == 2);
    CHECK(slurp(err).find("Assumption 5 (Realizability) violated") != std::string::npos);
}

TEST_CASE("simulate is deterministic across invocations") {
    const fs::path a = work_dir() / "det_a.csv";
    const fs::path b = work_dir() / "det_b.csv";
    REQUIRE(run_cli("simulate --preset P-HET --p 2 --q 2 --n 100 --seed 12 --out " +
                    a.string()) == 0);
    REQUIRE(run_cli("simulate --preset P-HET --p 2 --q 2 --n 100 --seed 12 --out " +
                    b.string()) == 0);
    CHECK(slurp(a) == slurp(b));
}
