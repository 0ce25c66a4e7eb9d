#include "mfhp/cli.hpp"
#include "mfhp/core.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mfhp;
namespace fs = std::filesystem;

namespace {

struct Invocation {
    int status;
    std::string out, err;
};

Invocation invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "mfhp");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int status = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mfhp_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

CsvTable table(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f);
    return read_csv_table(f);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("serialized configs parse back unchanged") {
    for (const std::string& name : kProblemNames) {
        const RunConfig d = default_config(name);
        CHECK(parse_config(serialize_config(d)) == d);
    }
    RunConfig c = default_config("peak");
    c.ghost_nodes = false;
    c.warm_start = false;
    c.gamma = 1.0 / 3.0;
    c.h0 = 0.1 + 0.2;  // not exactly representable as a short decimal
    c.orders = {2, 6};
    c.m0 = 6;
    c.seed = 1234567890123ull;
    c.study_h = {0.05, 0.025};
    c.ref = "some/file.csv";
    const RunConfig back = parse_config(serialize_config(c));
    CHECK(back == c);
    CHECK(back.h0 == c.h0);
    CHECK_FALSE(back.ghost_nodes);

    const auto keys = config_keys();
    const std::string text = serialize_config(c);
    std::size_t n = 0;
    for (std::size_t p = 0; (p = text.find('\n', p)) != std::string::npos; ++p) ++n;
    CHECK(n == keys.size());
    CHECK(std::find(keys.begin(), keys.end(), "ghost_nodes") != keys.end());
}

TEST_CASE("benchmark defaults") {
    const RunConfig p = default_config("peak");
    CHECK(p.h_band.alpha == 0.225);
    CHECK(p.h_band.beta == 0.175);
    CHECK(p.h_band.lambda == 2.625);
    CHECK(p.h_band.theta == 1.01);
    CHECK(p.p_band.alpha == 0.05);
    CHECK(p.p_band.beta == 1e-4);
    CHECK(p.p_band.lambda == 5.0);
    CHECK(p.p_band.theta == 1.258);
    CHECK(p.n_iter == 70);
    const RunConfig b = default_config("boussinesq");
    CHECK(b.h_band.lambda == 3.75);
    CHECK(b.n_max == 70000);
    CHECK(b.n_iter == 20);
    CHECK(b.poisson == 0.33);
    const RunConfig f = default_config("fretting");
    CHECK(f.friction == 0.3);
    CHECK(f.normal_force == 543.0);
    CHECK(f.tangential_force == 155.0);
    CHECK(f.axial_stress == 100.0);
    CHECK(f.length_scale() == 1e-3);
    CHECK(f.adaptivity().h_max == doctest::Approx(0.25e-3));
    CHECK(parse_config("", std::string("fretting")) == f);
    CHECK(parse_config("problem = boussinesq\n") == b);
    CHECK_THROWS_AS(default_config("heat"), ConfigError);
}

TEST_CASE("parse errors") {
    auto message = [](const std::string& text) -> std::string {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return e.what();
        }
        return "";
    };
    CHECK(message("alpha_h = 0.1\nbeta_h = 0.2\n").find("beta") != std::string::npos);
    CHECK(message("colour = red\n").find("colour") != std::string::npos);
    CHECK(message("n_iter = many\n").find("n_iter") != std::string::npos);
    CHECK(message("n_iter = 3\nn_iter = 4\n").find("twice") != std::string::npos);
    CHECK(message("just words\n").find("line 1") != std::string::npos);
    CHECK(message("ghost_nodes = maybe\n").find("ghost_nodes") != std::string::npos);
    CHECK(message("problem = heat\n").find("heat") != std::string::npos);
    CHECK(message("# comment only\n\n n_iter = 3  # trailing\n").empty());
    CHECK(parse_config("n_iter = 3 # x\n").n_iter == 3);
}

TEST_CASE("usage errors exit with status 2") {
    CHECK(invoke({}).status == 2);
    CHECK(invoke({"run", "--problem", "heat"}).status == 2);
    CHECK(invoke({"frobnicate"}).status == 2);
    CHECK(invoke({"run", "--config", "/nonexistent/file.cfg"}).status == 2);
}

TEST_CASE("run-time errors exit with status 1") {
    const fs::path dir = fresh_dir("bad");
    {
        std::ofstream(dir / "bad.cfg") << "colour = red\n";
    }
    const Invocation r = invoke({"run", "--config", (dir / "bad.cfg").string(), "--out", (dir / "o").string()});
    CHECK(r.status == 1);
    CHECK(r.err.find("colour") != std::string::npos);
    const Invocation ref = invoke({"run", "--problem", "peak", "--ref", "x.csv", "--out", (dir / "o").string()});
    CHECK(ref.status == 1);
    CHECK(ref.err.find("fretting") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("peak run writes parseable outputs") {
    const fs::path dir = fresh_dir("peak");
    {
        std::ofstream(dir / "p.cfg") << "h0 = 0.06\nn_iter = 5\n";
    }
    const Invocation r = invoke({"run", "--problem", "peak", "--config", (dir / "p.cfg").string(),
                                 "--max-iter", "1", "--out", (dir / "o").string()});
    REQUIRE(r.status == 0);
    CHECK(r.out.find("iter   0") != std::string::npos);
    CHECK(r.out.find("iter   1") != std::string::npos);
    CHECK(r.out.find("iter   2") == std::string::npos);

    const CsvTable rec = table(dir / "o" / "records.csv");
    CHECK(rec.rows.size() == 2);
    CHECK(rec.number(1, "iter") == 1.0);
    const CsvTable sol = table(dir / "o" / "solution.csv");
    REQUIRE_FALSE(sol.rows.empty());
    double worst = 0, scale = 0;
    for (std::size_t i = 0; i < sol.rows.size(); ++i) {
        worst = std::max(worst, std::abs(sol.number(i, "u") - sol.number(i, "u_exact")));
        scale = std::max(scale, std::abs(sol.number(i, "u_exact")));
    }
    // the written solution is the reported (lowest error) iteration; norms are relative
    worst /= scale;
    double best = INFINITY;
    for (std::size_t i = 0; i < rec.rows.size(); ++i) best = std::min(best, rec.number(i, "einf"));
    CHECK(worst == doctest::Approx(best).epsilon(1e-9));
    CHECK(fs::exists(dir / "o" / "summary.log"));

    std::ifstream meta(dir / "o" / "meta");
    std::stringstream ss;
    ss << meta.rdbuf();
    CHECK(ss.str().find("n_iter = 1") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("fretting run reports contact data and reference difference") {
    const fs::path dir = fresh_dir("fretting");
    {
        std::ofstream ref(dir / "ref.csv");
        ref << "x,sigma_xx\n";
        for (int i = -10; i <= 10; ++i) ref << i * 0.02 << ",0\n";
    }
    const Invocation r = invoke({"run", "--problem", "fretting", "--max-iter", "0", "--ref",
                                 (dir / "ref.csv").string(), "--out", (dir / "o").string()});
    REQUIRE(r.status == 0);
    CHECK(r.out.find("a = 0.2067") != std::string::npos);
    CHECK(r.out.find("mean |dsigma_xx| over |x| <= a") != std::string::npos);
    CHECK(r.out.find("(21 reference points)") != std::string::npos);
    const CsvTable st = table(dir / "o" / "stress.csv");
    CHECK_FALSE(st.rows.empty());
    CHECK(st.column("von_mises") == 8);
    const CsvTable surf = table(dir / "o" / "surface.csv");
    REQUIRE(surf.rows.size() > 10);
    for (std::size_t i = 1; i < surf.rows.size(); ++i) CHECK(surf.number(i, surf.header[0]) > surf.number(i - 1, surf.header[0]));
    fs::remove_all(dir);
}

TEST_CASE("study writes per-cell and median tables") {
    const fs::path dir = fresh_dir("study");
    {
        std::ofstream(dir / "s.cfg") << "study_h = 0.08, 0.06\nstudy_m = 2\n";
    }
    const Invocation r = invoke({"study", "--problem", "peak", "--config", (dir / "s.cfg").string(),
                                 "--seeds", "2", "--out", (dir / "o").string()});
    REQUIRE(r.status == 0);
    CHECK(r.out.find("m 2: e_inf slope vs h") != std::string::npos);
    CHECK(table(dir / "o" / "study_cells.csv").rows.size() == 4);
    const CsvTable rows = table(dir / "o" / "study.csv");
    CHECK(rows.rows.size() == 2);
    CHECK(rows.number(0, "failures") == 0.0);
    fs::remove_all(dir);
}

TEST_CASE("self-check passes") {
    const Invocation r = invoke({"check"});
    CHECK(r.status == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.find("PASS weight exactness") != std::string::npos);
}

TEST_CASE("CSV reader") {
    std::istringstream in("a,b,c\n1,,3\n\n4,5,6\n");
    const CsvTable t = read_csv_table(in);
    CHECK(t.rows.size() == 2);
    CHECK(std::isnan(t.number(0, "b")));
    CHECK(t.number(1, "c") == 6.0);
    CHECK_THROWS_AS(t.column("d"), Error);
    std::istringstream tiny("a\n1.1858078883913839e-314\n");
    CHECK(read_csv_table(tiny).number(0, "a") > 0.0);
    std::istringstream junk("a\n1.5x\n");
    CHECK_THROWS_AS(read_csv_table(junk).number(0, "a"), Error);
    std::istringstream ragged("a,b\n1\n");
    CHECK_THROWS_AS(read_csv_table(ragged), Error);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_csv_table(empty), Error);
}

}
