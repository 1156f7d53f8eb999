#include "doctest.h"

#include "cflow/analysis.hpp"
#include "cflow/history_io.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cflow;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string &text)
{
    try {
        parse_config(text);
    } catch (const ConfigError &e) {
        return e.what();
    }
    return "";
}

fs::path scratch_dir(const std::string &name)
{
    const fs::path p = fs::temp_directory_path() / ("cflow_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const char *kFull = R"({
  "command": "simulate",
  "seed": 42,
  "output": "out",
  "speed": {"family": "power_mean", "r": 2.5},
  "cone": {"type": "m_convex", "m": 1, "margin": 0.01},
  "shape": {"kind": "ellipsoid", "n": 3, "resolution": 150, "axes": [2, 1, 1]},
  "flow": {"c_cfl": 0.3, "max_time": 0.5, "snapshot_every": 25, "pinching_m": 1},
  "pinching": [{"kind": "cylindrical", "m": 1, "sigma": 0.2, "p": 12, "theta": 3.5},
               {"kind": "inscribed", "m": 2, "K": 0.5}],
  "monitors": ["area_decay", {"name": "pinching_series", "series": "convexity", "transient": 0.25},
               {"name": "ancient", "extinction_time": 0.6}],
  "certify": {"properties": ["concave"], "samples": 100},
  "probes": [{"form": "g2_gamma", "context": 0, "samples": 50}]
})";

}  // namespace

TEST_CASE("minimal config takes the defaults")
{
    const RunConfig c = parse_config(R"({"command": "simulate", "shape": {"kind": "sphere"}})");
    CHECK(c.flow.speed.family == "mean_curvature");
    CHECK(c.flow.c_cfl == 0.5);
    CHECK(c.flow.shape.n == 2);
    CHECK(!c.seed);
    const auto echoed = nlohmann::json::parse(emit_config(c));
    CHECK(echoed["flow"]["c_cfl"] == 0.5);
    CHECK(echoed["flow"]["max_time"] == "inf");
    CHECK(echoed["shape"]["kind"] == "sphere");
    CHECK(echoed.contains("certify"));
}

TEST_CASE("round trip")
{
    const RunConfig c = parse_config(kFull);
    CHECK(c.flow.speed.family == "power_mean");
    CHECK(c.pinching.size() == 2);
    CHECK(c.pinching[0].theta == 3.5);
    CHECK(c.monitors.size() == 3);
    CHECK(c.monitors[0].name == "area_decay");
    CHECK(c.monitors[1].transient == 0.25);
    CHECK(c.probes[0].samples == 50);
    const std::string text = emit_config(c);
    const RunConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(emit_config(back) == text);

    const RunConfig minimal = parse_config(R"({"command": "analyze"})");
    CHECK(parse_config(emit_config(minimal)) == minimal);
}

TEST_CASE("validation errors carry field paths")
{
    const std::string sigma =
        error_of(R"({"command": "simulate", "pinching": [{"kind": "cylindrical", "sigma": 0.7}]})");
    CHECK(sigma.find("config.pinching[0].sigma") != std::string::npos);
    CHECK(sigma.find("sigma must lie in (0, 0.5)") != std::string::npos);

    const std::string m =
        error_of(R"({"command": "simulate", "shape": {"kind": "sphere", "n": 3}, "pinching": [{"m": 3}]})");
    CHECK(m.find("config.pinching[0].m") != std::string::npos);
    CHECK(m.find("m must satisfy 0 ≤ m ≤ n−1") != std::string::npos);

    const std::string speed = error_of(R"({"command": "simulate", "speed": "curvy"})");
    CHECK(speed.find("config.speed") != std::string::npos);
    CHECK(speed.find("harmonic_mean") != std::string::npos);
    CHECK(speed.find("two_harmonic") != std::string::npos);

    const std::string shape = error_of(R"({"command": "simulate", "shape": {"kind": "blob"}})");
    CHECK(shape.find("config.shape.kind") != std::string::npos);
    CHECK(shape.find("ellipsoid") != std::string::npos);
    CHECK(shape.find("dumbbell") != std::string::npos);

    const std::string unknown = error_of(R"({"command": "simulate", "flow": {"cfl": 0.4}})");
    CHECK(unknown.find("config.flow.cfl") != std::string::npos);
    CHECK(unknown.find("unknown field") != std::string::npos);

    const std::string type = error_of(R"({"command": "simulate", "flow": {"c_cfl": "fast"}})");
    CHECK(type.find("config.flow.c_cfl") != std::string::npos);

    CHECK(error_of(R"({"command": "simulate", "flow": {"c_cfl": 1.2}})").find("c_cfl") != std::string::npos);
    CHECK(error_of(R"({"command": "fly"})").find("available") != std::string::npos);
    CHECK(error_of(R"({"command": "simulate", "monitors": ["telepathy"]})").find("config.monitors[0]") !=
          std::string::npos);
    CHECK(error_of(R"({"command": "simulate", "shape": {"kind": "sphere", "representation": "mesh", "n": 3}})")
              .find("config.shape.n") != std::string::npos);
    CHECK(!error_of("{not json").empty());
}

TEST_CASE("seeds are required for sampling")
{
    CHECK(error_of(R"({"command": "certify-speed"})").find("seed") != std::string::npos);
    CHECK(error_of(R"({"command": "probe-q", "pinching": [{}], "probes": [{"form": "g1_sign"}]})").find("seed") != std::string::npos);
    CHECK(error_of(R"({"command": "simulate", "monitors": ["harnack"]})").find("seed") != std::string::npos);
    CHECK(error_of(R"({"command": "simulate", "monitors": ["area_decay"]})").empty());
}

TEST_CASE("history directories")
{
    RunConfig cfg = parse_config(R"({"command": "simulate", "shape": {"kind": "ellipsoid", "n": 3, "resolution": 80},
                                    "flow": {"max_time": 0.05, "snapshot_every": 40}})");
    const FlowHistory h = run(cfg.flow);
    const fs::path dir = scratch_dir("history");
    write_history(h, cfg, dir.string());
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "series.csv"));
    CHECK(fs::exists(dir / "snapshots" / "0000.csv"));
    CHECK(fs::exists(dir / "snapshots" / "0000.meta.json"));

    const StoredHistory back = read_history(dir.string());
    CHECK(back.config == cfg);
    CHECK(back.history.termination == h.termination);
    CHECK(back.history.steps == h.steps);
    REQUIRE(back.history.entries.size() == h.entries.size());
    for (size_t i = 0; i < h.entries.size(); ++i) {
        const Surface &a = *h.entries[i].surface, &b = *back.history.entries[i].surface;
        CHECK(back.history.entries[i].summary.t == h.entries[i].summary.t);
        REQUIRE(a.size() == b.size());
        for (int k = 0; k < a.size(); ++k) {
            CHECK(a.point(k).position == b.point(k).position);
            CHECK(a.point(k).kappa.values() == b.point(k).kappa.values());
        }
    }
    CHECK(series_csv(back.history) == series_csv(h));

    // identical inputs give byte-identical artifacts
    const fs::path again = scratch_dir("history_again");
    write_history(run(cfg.flow), cfg, again.string());
    CHECK(slurp(dir / "series.csv") == slurp(again / "series.csv"));
    CHECK(slurp(dir / "manifest.json") == slurp(again / "manifest.json"));

    auto reports = run_monitors(cfg, back.history);
    write_reports(reports, dir.string());
    CHECK(fs::exists(dir / "monitors.csv"));
    CHECK(fs::exists(dir / "reports" / "area_decay.json"));

    fs::remove_all(dir);
    fs::remove_all(again);
    CHECK_THROWS_AS(read_history(dir.string()), IoError);
}

TEST_CASE("mesh histories")
{
    RunConfig cfg = parse_config(R"({"command": "simulate",
        "shape": {"kind": "sphere", "representation": "mesh", "resolution": 2},
        "flow": {"max_time": 0.01, "snapshot_every": 10, "full_summaries": false}})");
    const FlowHistory h = run(cfg.flow);
    const fs::path dir = scratch_dir("mesh_history");
    write_history(h, cfg, dir.string());
    CHECK(fs::exists(dir / "snapshots" / "0000.obj"));
    const StoredHistory back = read_history(dir.string());
    REQUIRE(back.history.entries.size() == h.entries.size());
    const Surface &a = *h.entries.back().surface, &b = *back.history.entries.back().surface;
    REQUIRE(a.size() == b.size());
    for (int k = 0; k < a.size(); ++k) CHECK(a.point(k).position == b.point(k).position);
    fs::remove_all(dir);
}

TEST_CASE("exact sphere fixture passes every default monitor")
{
    RunConfig cfg = parse_config(R"({"command": "analyze", "seed": 3, "shape": {"kind": "sphere", "resolution": 200}})");
    const FlowHistory h = exact_sphere_history(cfg.flow, 25, 0.9 * sphere_extinction_time(cfg.flow));
    const auto reports = run_monitors(cfg, h);
    CHECK(!any_failed(reports));
    for (const MonitorReport &r : reports) CHECK_MESSAGE(r.verdict != Verdict::Fail, r.name, ": ", r.detail);
}

TEST_CASE("certification and probes")
{
    RunConfig cfg = parse_config(R"({"command": "certify-speed", "seed": 8, "shape": {"kind": "sphere", "n": 3}})");
    const auto cert = run_certification(cfg);
    REQUIRE(cert.size() == 5);
    for (const MonitorReport &r : cert) CHECK_MESSAGE(r.verdict == Verdict::Pass, r.name);

    RunConfig probe = parse_config(R"({"command": "probe-q", "seed": 8, "speed": "two_harmonic",
        "shape": {"kind": "sphere", "n": 3},
        "pinching": [{"kind": "cylindrical", "m": 1, "cone": {"type": "m_convex", "m": 1, "margin": 0.05}}],
        "probes": [{"form": "g1_sign", "samples": 2000}]})");
    const auto q = run_probes(probe);
    REQUIRE(q.size() == 1);
    CHECK(q[0].verdict == Verdict::Pass);
    CHECK(q[0].scalars.at("max_normalized") <= 1e-10);
}
