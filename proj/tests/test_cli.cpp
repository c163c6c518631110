#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "squarepack/cli.hpp"
#include "squarepack/errors.hpp"
#include "squarepack/render.hpp"
#include "squarepack/sampler.hpp"
#include "squarepack/sticks.hpp"

using namespace squarepack;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("squarepack_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int status;
    std::string out;
    std::string err;
};

Run cli(const std::string& args) {
    fs::path o = scratch() / "stdout.txt", e = scratch() / "stderr.txt";
    std::string cmd = std::string(SQUAREPACK_CLI_PATH) + " " + args + " >" + o.string() + " 2>" + e.string();
    int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(o), slurp(e)};
}

int count(const std::string& text, const std::string& needle) {
    int n = 0;
    for (std::size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
    return n;
}

Configuration four_parities() {
    return Configuration::create(8, 8, Boundary::periodic, std::vector<Point>{{1, 1}, {4, 1}, {1, 4}, {4, 4}});
}

// Distinct colours in a binary PPM body.
std::set<std::tuple<int, int, int>> ppm_colors(const std::string& ppm) {
    std::istringstream in(ppm);
    std::string magic, line;
    std::getline(in, magic);
    int w = 0, h = 0, max = 0;
    while (in.peek() == '#') std::getline(in, line);
    in >> w >> h >> max;
    in.get();
    std::set<std::tuple<int, int, int>> out;
    for (long i = 0; i < static_cast<long>(w) * h; ++i) {
        unsigned char px[3];
        in.read(reinterpret_cast<char*>(px), 3);
        out.insert({px[0], px[1], px[2]});
    }
    return out;
}

std::tuple<int, int, int> as_tuple(Rgb c) { return {c.r, c.g, c.b}; }

}  // namespace

TEST_CASE("empty configuration renders a blank grid") {
    auto empty = Configuration::empty(8, 6, Boundary::periodic);
    std::string svg = render_svg(empty);
    CHECK(count(svg, "class=\"tile") == 0);
    CHECK(count(svg, "class=\"grid\"") == 1);
    auto colors = ppm_colors(render_ppm(empty));
    CHECK(colors == std::set<std::tuple<int, int, int>>{as_tuple(kBackground), as_tuple(kGridColor)});
}

TEST_CASE("one tile of each parity gives four distinct colours") {
    auto c = four_parities();
    std::string svg = render_svg(c);
    for (Rgb col : kParityColors) CHECK(count(svg, "fill=\"" + hex_color(col) + "\"") == 1);
    std::set<std::tuple<int, int, int>> fills;
    for (Rgb col : kParityColors) fills.insert(as_tuple(col));
    CHECK(fills.size() == 4);
    auto colors = ppm_colors(render_ppm(c));
    for (Rgb col : kParityColors) CHECK(colors.count(as_tuple(col)) == 1);
}

TEST_CASE("tiles across a torus seam are drawn in every wrapped position") {
    auto c = Configuration::create(8, 8, Boundary::periodic, std::vector<Point>{{0, 0}});
    CHECK(count(render_svg(c), "class=\"tile") == 4);
    auto f = Configuration::create(8, 8, Boundary::free, std::vector<Point>{{0, 0}});
    CHECK(count(render_svg(f), "class=\"tile") == 1);
}

TEST_CASE("stick overlay has one path per extracted stick") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        ChainParams p;
        p.initial = seed_phase_configuration(16, 16, Boundary::periodic, Phase::ver0);
        p.lambda = 60;
        p.seed = seed;
        p.sweeps = 100;
        p.burn_in = 100;
        auto samples = collect_samples(p);
        RenderStyle style;
        style.sticks = true;
        CHECK(count(render_svg(samples.back(), style), "class=\"stick\"") ==
              static_cast<int>(extract_sticks(samples.back()).size()));
    }
    RenderStyle plain;
    CHECK(count(render_svg(four_parities(), plain), "class=\"stick\"") == 0);
}

TEST_CASE("render errors") {
    auto c = four_parities();
    CHECK_THROWS_AS(render_image(c, {}, "/nonexistent/dir/x.svg"), IoError);
    RenderStyle bad;
    bad.cell = 0;
    CHECK_THROWS_AS(render_svg(c, bad), SpecError);
    CHECK_THROWS_AS(parse_image_format("gif"), SpecError);
    CHECK(image_format_for_path("a.ppm") == ImageFormat::ppm);
    CHECK(image_format_for_path("a.svg") == ImageFormat::svg);
}

TEST_CASE("execute_spec in process") {
    std::ostringstream out;
    json r = execute_spec({{"subcommand", "exact2d"}, {"width", 4}, {"height", 4}}, out);
    CHECK(r["coefficients"][0] == 1);
    CHECK(r["coefficients"][1] == 16);
    CHECK(r["coefficients"][2] == 56);
    CHECK(r["coefficients"][4] == 12);
    CHECK(r["spec"]["seed"] == 1);
    CHECK(r["spec"]["boundary"] == "periodic");
    CHECK_THROWS_AS(execute_spec({{"subcommand", "exact2d"}, {"colour", 3}}, out), SpecError);
    CHECK_THROWS_AS(execute_spec({{"subcommand", "exact2d"}, {"width", "four"}}, out), SpecError);
    CHECK_THROWS_AS(execute_spec({{"subcommand", "nope"}}, out), SpecError);
    CHECK_THROWS_AS(execute_spec({{"width", 4}}, out), SpecError);
}

TEST_CASE("exact1d prints the transfer-matrix value") {
    auto r = cli("exact1d --L 4 --lambda 1");
    CHECK(r.status == 0);
    CHECK(r.out == "7\n");
    CHECK(cli("exact1d --L 2 --lambda 4").out == "2.25\n");
    CHECK(cli("exact1d --L 2 --lambda 4 --boundary free").out == "1.25\n");
}

TEST_CASE("list flags take several values") {
    auto r = cli("sample --width 16 --height 16 --lambda 5 --sweeps 100 --observables parity_density covariance:1,0,3,0");
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK(j["spec"]["observables"] == json{"parity_density", "covariance:1,0,3,0"});
    CHECK(j.contains("covariances"));
    CHECK_FALSE(j.contains("stick_census"));
    json e = json::parse(cli("exact2d --lambda 1,2 --lambda 3").out);
    CHECK(e["spec"]["lambda"] == json{1.0, 2.0, 3.0});
    CHECK(e["evaluations"].size() == 3);
}

TEST_CASE("usage and run errors") {
    auto unknown = cli("frobnicate");
    CHECK(unknown.status == 2);
    CHECK(unknown.err.find("Usage") != std::string::npos);
    CHECK(cli("").status == 2);
    CHECK(cli("exact1d --no-such-flag 1").status == 2);

    auto odd = cli("exact1d --L 3");
    CHECK(odd.status == 1);
    json e = json::parse(odd.err);
    CHECK(e["error"]["code"] == "OddLength");
    CHECK(json::parse(cli("exact1d --lambda abc").err)["error"]["code"] == "SpecError");
    CHECK(json::parse(cli("render --config /nonexistent.txt --out x.svg").err)["error"]["code"] == "IoError");
    CHECK(json::parse(cli("sample --spec /nonexistent.json").err)["error"]["code"] == "IoError");
    CHECK(json::parse(cli("sample --lambda -1").err)["error"]["code"] == "NonpositiveFugacity");
}

TEST_CASE("sample spec files give identical artifacts") {
    fs::path spec = scratch() / "run.json";
    std::ofstream(spec) << json{{"subcommand", "sample"}, {"width", 16}, {"height", 16}, {"lambda", 20},
                                {"seed", 42}, {"sweeps", 300}, {"burn_in", 50}, {"thinning", 10},
                                {"initial", "ver0"}, {"offsets", "random"},
                                {"observables", {"parity_density", "sticks", "phase", "structural"}}}
                               .dump();
    fs::path a = scratch() / "a.json", b = scratch() / "b.json";
    REQUIRE(cli("sample --spec " + spec.string() + " --out " + a.string()).status == 0);
    REQUIRE(cli("sample --spec " + spec.string() + " --out " + b.string()).status == 0);
    json ja = json::parse(slurp(a)), jb = json::parse(slurp(b));
    CHECK(ja["spec"]["seed"] == 42);
    CHECK(ja["metadata"]["seed"] == 42);
    ja["spec"].erase("out");
    jb["spec"].erase("out");
    CHECK(ja == jb);

    // The embedded spec reproduces the run on its own.
    fs::path again = scratch() / "again.json", c = scratch() / "c.json";
    json embedded = ja["spec"];
    std::ofstream(again) << embedded.dump();
    REQUIRE(cli("sample --spec " + again.string() + " --out " + c.string()).status == 0);
    json jc = json::parse(slurp(c));
    jc["spec"].erase("out");
    CHECK(jc == ja);

    // Flags override spec keys.
    fs::path d = scratch() / "d.json";
    REQUIRE(cli("sample --spec " + spec.string() + " --seed 7 --out " + d.string()).status == 0);
    CHECK(json::parse(slurp(d))["spec"]["seed"] == 7);
}

TEST_CASE("configuration pipeline through sticks, phase, components and render") {
    fs::path cfg = scratch() / "final.txt";
    REQUIRE(cli("sample --width 16 --height 16 --lambda 130 --initial ver0 --offsets random --sweeps 200 --burn-in 100 --final-out " +
                cfg.string() + " --out " + (scratch() / "s.json").string())
                .status == 0);
    Configuration c = load_configuration(cfg.string());

    auto sticks = cli("sticks --config " + cfg.string() + " --type ver0 --K 2 --block-height 2");
    REQUIRE(sticks.status == 0);
    json js = json::parse(sticks.out);
    CHECK(js["sticks"].size() == extract_sticks(c).size());
    CHECK(js["checks"]["vertical_meets_horizontal"] == false);
    CHECK(js.contains("psi"));

    auto phase = cli("phase --config " + cfg.string() + " --lambda 130");
    REQUIRE(phase.status == 0);
    CHECK(json::parse(phase.out)["phase"] == std::string(to_string(classify_phase(c, 1, default_stick_threshold(130)))));
    CHECK(cli("phase --config " + cfg.string()).status == 1);

    auto comps = cli("components --config " + cfg.string());
    REQUIRE(comps.status == 0);
    CHECK(json::parse(comps.out).contains("components"));

    fs::path svg = scratch() / "f.svg", ppm = scratch() / "f.ppm";
    auto r = cli("render --config " + cfg.string() + " --out " + svg.string() + " --sticks");
    REQUIRE(r.status == 0);
    std::string text = slurp(svg);
    CHECK(count(text, "class=\"stick\"") == static_cast<int>(extract_sticks(c).size()));
    CHECK(text.find("<metadata>") != std::string::npos);
    CHECK(text.find("&quot;") == std::string::npos);
    CHECK(text.find("\"seed\":1") != std::string::npos);
    REQUIRE(cli("render --config " + cfg.string() + " --out " + ppm.string()).status == 0);
    CHECK(slurp(ppm).rfind("P6\n# {\"spec\"", 0) == 0);
}

TEST_CASE("components window enumeration and coupling from the command line") {
    auto w = cli("components --width 6 --height 6 --M 1,2,3 --catalog-out " + (scratch() / "cat.jsonl").string());
    REQUIRE(w.status == 0);
    json j = json::parse(w.out);
    CHECK(j["all_pass"] == true);
    CHECK(j["counting"].size() == 3);
    CHECK(fs::file_size(scratch() / "cat.jsonl") > 0);

    fs::path csv = scratch() / "tail.csv";
    auto t = cli("coupling --width 16 --height 16 --lambda 400 --sweeps 300 --burn-in 100 --thinning 20 --csv-out " +
                 csv.string());
    REQUIRE(t.status == 0);
    CHECK(json::parse(t.out)["spec"]["seed"] == 1);
    CHECK(slurp(csv).rfind("direction,d,count,probability\n", 0) == 0);
}
