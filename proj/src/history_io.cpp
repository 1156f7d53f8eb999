#include "cflow/history_io.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cflow {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string &s, const std::string &where)
{
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw IoError(where + ": cannot parse number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string &line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

std::string snapshot_stem(int i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d", i);
    return buf;
}

json num(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double from_json(const json &j)
{
    if (j.is_number()) return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}

const std::vector<std::string> kScalarColumns = {
    "t", "step", "max_F", "min_F", "argmax_F", "max_cyl_ratio", "min_convexity_ratio", "max_insc_ratio",
    "min_exsc_ratio", "max_insc_pinching", "area", "volume", "inradius", "circumradius", "diameter",
    "max_grad_ratio"};

std::vector<double> summary_row(const SnapshotSummary &s)
{
    return {s.t, double(s.step), s.max_F, s.min_F, double(s.argmax_F), s.max_cyl_ratio, s.min_convexity_ratio,
            s.max_insc_ratio, s.min_exsc_ratio, s.max_insc_pinching, s.area, s.volume, s.inradius,
            s.circumradius, s.diameter, s.max_grad_ratio};
}

SnapshotSummary summary_from_row(const std::vector<double> &v, int n)
{
    SnapshotSummary s;
    s.t = v[0], s.step = long(v[1]), s.max_F = v[2], s.min_F = v[3], s.argmax_F = int(v[4]);
    s.max_cyl_ratio = v[5], s.min_convexity_ratio = v[6], s.max_insc_ratio = v[7], s.min_exsc_ratio = v[8];
    s.max_insc_pinching = v[9], s.area = v[10], s.volume = v[11], s.inradius = v[12];
    s.circumradius = v[13], s.diameter = v[14], s.max_grad_ratio = v[15];
    for (int j = 0; j < n; ++j) s.cyl_distance_at_max.push_back(v[16 + j]);
    s.remeshes = int(v[16 + n]);
    return s;
}

}  // namespace

std::string series_csv(const FlowHistory &h)
{
    const int n = h.entries.empty() ? 0 : h.entries.front().surface->dim();
    std::ostringstream os;
    for (size_t c = 0; c < kScalarColumns.size(); ++c) os << (c ? "," : "") << kScalarColumns[c];
    for (int j = 0; j < n; ++j) os << ",cyl_distance_at_max_" << j;
    os << ",remeshes\n";
    for (const HistoryEntry &e : h.entries) {
        std::vector<double> row = summary_row(e.summary);
        for (size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << g17(row[c]);
        for (double d : e.summary.cyl_distance_at_max) os << "," << g17(d);
        os << "," << e.summary.remeshes << "\n";
    }
    return os.str();
}

void write_history(const FlowHistory &h, const RunConfig &cfg, const std::string &dir)
{
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "snapshots", ec);
    if (ec) throw IoError("cannot create directory '" + dir + "/snapshots': " + ec.message());

    json manifest;
    manifest["config"] = json::parse(emit_config(cfg));
    manifest["termination"] = h.termination;
    manifest["termination_detail"] = h.termination_detail;
    manifest["steps"] = h.steps;
    manifest["remeshes"] = h.remeshes;
    manifest["initial_diameter"] = num(h.initial_diameter);
    json snaps = json::array();
    for (size_t i = 0; i < h.entries.size(); ++i) {
        const HistoryEntry &e = h.entries[i];
        const std::string stem = snapshot_stem(int(i));
        json meta;
        meta["index"] = i;
        meta["t"] = num(e.summary.t);
        meta["step"] = e.summary.step;
        meta["n"] = e.surface->dim();
        std::string file;
        if (const auto *p = dynamic_cast<const ProfileSurface *>(e.surface.get())) {
            file = "snapshots/" + stem + ".csv";
            std::ostringstream os;
            os << "x,r\n";
            for (const Vector2 &q : p->nodes()) os << g17(q.x()) << "," << g17(q.y()) << "\n";
            write_text((fs::path(dir) / file).string(), os.str());
            meta["representation"] = "profile";
            meta["orientation"] = p->orientation();
            meta["policy"] = {{"min_ratio", num(p->policy().min_ratio)},
                              {"max_ratio", num(p->policy().max_ratio)},
                              {"curvature_weight", num(p->policy().curvature_weight)}};
        } else if (const auto *m = dynamic_cast<const TriMesh *>(e.surface.get())) {
            file = "snapshots/" + stem + ".obj";
            write_obj(*m, (fs::path(dir) / file).string());
            meta["representation"] = "mesh";
            meta["genus"] = m->genus();
            meta["policy"] = {{"min_ratio", num(m->policy().min_ratio)},
                              {"max_ratio", num(m->policy().max_ratio)},
                              {"min_quality", num(m->policy().min_quality)},
                              {"fit_order", m->policy().fit_order}};
        } else {
            throw IoError("snapshot " + std::to_string(i) + " has an unknown representation");
        }
        meta["file"] = file;
        write_text((fs::path(dir) / ("snapshots/" + stem + ".meta.json")).string(), meta.dump(2) + "\n");
        snaps.push_back({{"index", i}, {"t", num(e.summary.t)}, {"step", e.summary.step}, {"file", file}});
    }
    manifest["snapshots"] = snaps;
    write_text((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    write_text((fs::path(dir) / "series.csv").string(), series_csv(h));
}

namespace {

StoredHistory read_history_impl(const std::string &dir)
{
    const fs::path root(dir);
    const std::string manifest_path = (root / "manifest.json").string();
    json manifest;
    try {
        manifest = json::parse(read_text(manifest_path));
    } catch (const json::exception &e) {
        throw IoError(manifest_path + ": " + e.what());
    }
    StoredHistory out;
    out.config = parse_config(manifest.at("config").dump());
    FlowHistory &h = out.history;
    h.config = out.config.flow;
    h.termination = manifest.value("termination", "");
    h.termination_detail = manifest.value("termination_detail", "");
    h.steps = manifest.value("steps", 0L);
    h.remeshes = manifest.value("remeshes", 0);
    h.initial_diameter = from_json(manifest.at("initial_diameter"));

    // summaries
    const std::string series_path = (root / "series.csv").string();
    std::istringstream series(read_text(series_path));
    std::string line;
    std::getline(series, line);
    std::vector<SnapshotSummary> summaries;
    const int n = out.config.flow.shape.n;
    int row = 1;
    while (std::getline(series, line)) {
        ++row;
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (int(cells.size()) != int(kScalarColumns.size()) + n + 1)
            throw IoError(series_path + ":" + std::to_string(row) + ": expected " +
                        std::to_string(kScalarColumns.size() + n + 1) + " columns");
        std::vector<double> v;
        for (auto &c : cells) v.push_back(parse_double(c, series_path + ":" + std::to_string(row)));
        summaries.push_back(summary_from_row(v, n));
    }

    const json &snaps = manifest.at("snapshots");
    if (snaps.size() != summaries.size())
        throw IoError(dir + ": manifest lists " + std::to_string(snaps.size()) + " snapshots, series.csv has " +
                    std::to_string(summaries.size()));
    for (size_t i = 0; i < snaps.size(); ++i) {
        const std::string stem = snapshot_stem(int(i));
        const std::string meta_path = (root / ("snapshots/" + stem + ".meta.json")).string();
        json meta;
        try {
            meta = json::parse(read_text(meta_path));
        } catch (const json::exception &e) {
            throw IoError(meta_path + ": " + e.what());
        }
        const std::string file = (root / meta.at("file").get<std::string>()).string();
        const json &pol = meta.at("policy");
        SurfacePtr s;
        if (meta.at("representation") == "profile") {
            ProfileRemeshPolicy p;
            p.min_ratio = from_json(pol.at("min_ratio"));
            p.max_ratio = from_json(pol.at("max_ratio"));
            p.curvature_weight = from_json(pol.at("curvature_weight"));
            std::istringstream in(read_text(file));
            std::getline(in, line);
            std::vector<Vector2> nodes;
            int r = 1;
            while (std::getline(in, line)) {
                ++r;
                if (line.empty()) continue;
                auto cells = split(line, ',');
                if (cells.size() != 2) throw IoError(file + ":" + std::to_string(r) + ": expected x,r");
                const std::string where = file + ":" + std::to_string(r);
                nodes.emplace_back(parse_double(cells[0], where), parse_double(cells[1], where));
            }
            s = std::make_shared<ProfileSurface>(std::move(nodes), meta.at("n").get<int>(), p,
                                                 meta.at("orientation").get<int>());
        } else {
            MeshRemeshPolicy p;
            p.min_ratio = from_json(pol.at("min_ratio"));
            p.max_ratio = from_json(pol.at("max_ratio"));
            p.min_quality = from_json(pol.at("min_quality"));
            p.fit_order = pol.at("fit_order").get<int>();
            s = SurfacePtr(read_obj(file, meta.at("genus").get<int>(), p));
        }
        h.entries.push_back({summaries[i], s});
    }
    return out;
}

}  // namespace

StoredHistory read_history(const std::string &dir)
{
    try {
        return read_history_impl(dir);
    } catch (const nlohmann::json::exception &e) {
        throw IoError(dir + ": malformed history: " + e.what());
    }
}

double sphere_extinction_time(const FlowConfig &cfg)
{
    SpeedFunction speed(cfg.speed, cfg.shape.n);
    const double f1 = speed.value(Vector::Ones(cfg.shape.n));
    return cfg.shape.radius * cfg.shape.radius / (2.0 * f1);
}

FlowHistory exact_sphere_history(const FlowConfig &cfg, int count, double t_end)
{
    if (cfg.shape.kind != "sphere") throw ConfigError("exact sphere history needs a sphere shape");
    if (count < 2) throw ConfigError("exact sphere history needs at least two snapshots");
    const int n = cfg.shape.n;
    SpeedFunction speed(cfg.speed, n);
    const double f1 = speed.value(Vector::Ones(n));
    const double R0 = cfg.shape.radius;
    const double T = sphere_extinction_time(cfg);
    if (!(t_end > 0.0 && t_end < T)) throw ConfigError("t_end must lie in (0, extinction time)");

    FlowHistory h;
    h.config = cfg;
    h.termination = "max_time";
    h.termination_detail = "exact shrinking sphere";
    h.initial_diameter = 2.0 * R0;
    for (int k = 0; k < count; ++k) {
        const double t = t_end * double(k) / double(count - 1);
        const double R = std::sqrt(R0 * R0 - 2.0 * f1 * t);
        SurfacePtr s = profile_sphere(n, R, cfg.shape.resolution, cfg.shape.profile_policy);
        SnapshotSummary sum = summarize(*s, speed, cfg.pinching_m, cfg.full_summaries);
        sum.t = t;
        sum.step = k;
        h.entries.push_back({sum, s});
    }
    h.steps = count - 1;
    return h;
}

}  // namespace cflow
