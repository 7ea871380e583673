#include "cohlab/cli.hpp"

#include "cohlab/trajectory_io.hpp"
#include "cohlab/window_analysis.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace cohlab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class UsageError : public Error {
  public:
    using Error::Error;
};

fs::path data_dir() {
    if (const char* env = std::getenv("COHERENCY_LAB_DATA"); env && *env) return env;
#ifdef COHLAB_DEFAULT_DATA_DIR
    return COHLAB_DEFAULT_DATA_DIR;
#else
    return "data";
#endif
}

// Relative inputs are looked up next to `base`, then in the working directory, then in the data directory.
fs::path resolve_input(const std::string& p, const fs::path& base) {
    if (p.empty()) return {};
    const fs::path path(p);
    if (path.is_absolute()) return path;
    if (!base.empty() && fs::exists(base / path)) return base / path;
    if (fs::exists(path)) return path;
    if (fs::exists(data_dir() / path)) return data_dir() / path;
    return path;
}

std::string read_text(const fs::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw InputError(std::string("cannot open ") + what + " file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json read_json(const fs::path& path, const char* what) {
    try {
        return json::parse(read_text(path, what));
    } catch (const json::parse_error& e) {
        throw InputError(std::string("parse error in ") + what + " file " + path.string() + ": " + e.what());
    }
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "nan"; }

// Either a path or, as stored in a manifest, the document itself.
struct Input {
    fs::path path;
    json inline_doc;

    bool empty() const { return path.empty() && inline_doc.is_null(); }
    std::string describe() const { return path.empty() ? "<inline>" : path.string(); }
};

struct RunConfig {
    Input case_input;
    Input events_input;
    double dt = 1e-3;
    double t_stop = 10.0;
    double sample_dt = 0.01;
    std::optional<double> damping;
    std::vector<Metric> metrics{Metric::cc};
    WindowSpec windows{};
    Linkage linkage = Linkage::average;
    CutCriterion cut = LargestGap{};
    fs::path out = "out";
    bool force = false;
    bool sf_literal = false;
    bool dump_pf = false;
    fs::path trajectory;
    fs::path epochs;
    fs::path groupings;
    Input freeze_grouping;
};

std::vector<Metric> parse_metrics(const std::string& s) {
    if (s == "both") return {Metric::cc, Metric::ks};
    std::vector<Metric> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_metric(item));
    if (out.empty()) throw InputError("empty metric list");
    return out;
}

json metrics_json(const std::vector<Metric>& ms) {
    json arr = json::array();
    for (auto m : ms) arr.push_back(to_string(m));
    return arr;
}

// Library parse failures on option values are usage errors at this level.
template <typename F>
auto as_usage(F&& f) {
    try {
        return f();
    } catch (const InputError& e) {
        throw UsageError(e.what());
    }
}

void apply_config_file(RunConfig& cfg, const fs::path& file) {
    json doc = read_json(file, "config");
    if (doc.contains("config")) doc = doc["config"];  // manifests embed the effective config
    if (!doc.is_object()) throw InputError("config file must hold a JSON object");
    const fs::path base = file.parent_path();

    auto input = [&](const char* key, Input& dst) {
        if (!doc.contains(key)) return;
        const auto& v = doc[key];
        if (v.is_string()) {
            dst = {resolve_input(v.get<std::string>(), base), json()};
        } else {
            dst = {fs::path(), v};
        }
    };
    try {
        input("case", cfg.case_input);
        input("events", cfg.events_input);
        input("freeze_grouping", cfg.freeze_grouping);
        if (doc.contains("dt")) cfg.dt = doc["dt"].get<double>();
        if (doc.contains("t_stop")) cfg.t_stop = doc["t_stop"].get<double>();
        if (doc.contains("sample_dt")) cfg.sample_dt = doc["sample_dt"].get<double>();
        if (doc.contains("damping") && !doc["damping"].is_null()) cfg.damping = doc["damping"].get<double>();
        if (doc.contains("metric")) {
            const auto& m = doc["metric"];
            if (m.is_string()) {
                cfg.metrics = as_usage([&] { return parse_metrics(m.get<std::string>()); });
            } else {
                cfg.metrics.clear();
                for (const auto& x : m) cfg.metrics.push_back(as_usage([&] { return parse_metric(x.get<std::string>()); }));
            }
        }
        if (doc.contains("window_length")) cfg.windows.length_s = doc["window_length"].get<double>();
        if (doc.contains("window_step")) cfg.windows.step_s = doc["window_step"].get<double>();
        if (doc.contains("linkage")) cfg.linkage = as_usage([&] { return parse_linkage(doc["linkage"].get<std::string>()); });
        if (doc.contains("cut")) cfg.cut = as_usage([&] { return parse_cut(doc["cut"].get<std::string>()); });
        if (doc.contains("out")) cfg.out = doc["out"].get<std::string>();
        if (doc.contains("sf_literal")) cfg.sf_literal = doc["sf_literal"].get<bool>();
        if (doc.contains("dump_pf")) cfg.dump_pf = doc["dump_pf"].get<bool>();
        if (doc.contains("trajectory")) cfg.trajectory = resolve_input(doc["trajectory"].get<std::string>(), base);
        if (doc.contains("epochs")) cfg.epochs = resolve_input(doc["epochs"].get<std::string>(), base);
        if (doc.contains("groupings")) cfg.groupings = resolve_input(doc["groupings"].get<std::string>(), base);
    } catch (const json::exception& e) {
        throw InputError("config file " + file.string() + ": " + e.what());
    }
}

void check_ranges(const RunConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw UsageError("--dt must be positive");
    if (!(cfg.t_stop > 0.0)) throw UsageError("--t-stop must be positive");
    if (cfg.dt > cfg.t_stop) throw UsageError("--dt exceeds --t-stop");
    if (!(cfg.sample_dt > 0.0)) throw UsageError("--sample-dt must be positive");
    if (cfg.damping && !(*cfg.damping >= 0.0)) throw UsageError("--damping must be nonnegative");
    if (!(cfg.windows.length_s > 0.0)) throw UsageError("--window-length must be positive");
    if (!(cfg.windows.step_s > 0.0)) throw UsageError("--window-step must be positive");
}

int sample_every(const RunConfig& cfg) {
    const double ratio = cfg.sample_dt / cfg.dt;
    const long long k = std::llround(ratio);
    if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-6) {
        throw UsageError("--sample-dt must be a whole multiple of --dt");
    }
    return static_cast<int>(k);
}

// Collects the files a command will write and refuses to clobber existing ones.
class OutputPlan {
  public:
    OutputPlan(fs::path dir, bool force) : dir_(std::move(dir)), force_(force) {}

    fs::path add(const std::string& name) {
        names_.push_back(name);
        return dir_ / name;
    }

    void check() const {
        if (force_) return;
        for (const auto& n : names_) {
            if (fs::exists(dir_ / n)) {
                throw UsageError("refusing to overwrite " + (dir_ / n).string() + " (use --force)");
            }
        }
    }

    void prepare() const {
        check();
        fs::create_directories(dir_);
    }

    const std::vector<std::string>& names() const { return names_; }

  private:
    fs::path dir_;
    bool force_;
    std::vector<std::string> names_;
};

NetworkCase load_case_input(const Input& in) {
    if (in.empty()) throw UsageError("no case given (--case)");
    if (!in.inline_doc.is_null()) return parse_case(in.inline_doc.dump());
    return parse_case(read_text(in.path, "case"));
}

EventSchedule load_events_input(const Input& in) {
    if (in.empty()) return {};
    if (!in.inline_doc.is_null()) return parse_event_schedule(in.inline_doc.dump());
    return parse_event_schedule(read_text(in.path, "events"));
}

std::vector<std::vector<std::string>> load_frozen(const Input& in) {
    json doc = in.inline_doc.is_null() ? read_json(in.path, "grouping") : in.inline_doc;
    if (doc.is_object() && doc.contains("groups")) doc = doc["groups"];
    try {
        return doc.get<std::vector<std::vector<std::string>>>();
    } catch (const json::exception&) {
        throw InputError("grouping file " + in.describe() + " must hold a list of label lists");
    }
}

struct SimulateResult {
    std::size_t loss_pairs = 0;
    int pf_iterations = 0;
};

SimulateResult do_simulate(const RunConfig& cfg, const OutputPlan& plan, std::ostream& out, std::ostream& err) {
    const NetworkCase net = load_case_input(cfg.case_input);
    const EventSchedule schedule = load_events_input(cfg.events_input);

    SimOptions opts;
    opts.dt = cfg.dt;
    opts.t_stop = cfg.t_stop;
    opts.sample_every = sample_every(cfg);
    opts.damping = cfg.damping;
    opts.warn = [&err](const std::string& msg) { err << "warning: " << msg << '\n'; };

    SimulateResult res;
    plan.prepare();
    if (cfg.dump_pf) {
        const auto pf = solve_power_flow(net, opts.power_flow);
        res.pf_iterations = pf.iterations;
        write_power_flow_csv(net, pf, cfg.out / "powerflow.csv");
        out << "power flow converged in " << pf.iterations << " iterations\n";
    }

    const RotorTrajectory traj = simulate(net, schedule, opts);
    write_trajectory_csv(traj, cfg.out / "trajectory.csv");
    write_epochs_json(traj, cfg.out / "epochs.json");

    const auto losses = detect_loss_of_sync(traj);
    std::ofstream los(cfg.out / "loss_of_sync.csv");
    los << "time_s,machine_a,machine_b\n";
    for (const auto& l : losses) {
        los << fmt(l.time) << ',' << traj.machine_labels[l.first] << ',' << traj.machine_labels[l.second] << '\n';
    }
    res.loss_pairs = losses.size();

    out << "simulated " << traj.sample_count() << " samples of " << traj.machine_count() << " machines to t="
        << fmt(traj.times.back()) << " s\n";
    if (losses.empty()) {
        out << "loss of synchronism: none\n";
    } else {
        out << "loss of synchronism: " << losses.size() << " pairs, first at t=" << fmt(losses.front().time) << " s ("
            << traj.machine_labels[losses.front().first] << '-' << traj.machine_labels[losses.front().second] << ")\n";
    }
    return res;
}

RotorTrajectory load_trajectory(const RunConfig& cfg, Metric metric) {
    if (cfg.trajectory.empty()) throw UsageError("no trajectory given (--trajectory)");
    RotorTrajectory traj = ingest_trajectory_csv(cfg.trajectory);
    if (metric == Metric::ks) {
        if (cfg.epochs.empty()) throw InputError("metric ks needs the epochs sidecar: pass --epochs <epochs.json>");
        attach_epochs(traj, read_epochs_json(cfg.epochs));
    }
    return traj;
}

AnalysisOptions analysis_options(const RunConfig& cfg, Metric metric) {
    AnalysisOptions a;
    a.metric = metric;
    a.windows = cfg.windows;
    a.linkage = cfg.linkage;
    a.cut = cfg.cut;
    return a;
}

json groups_json(const CoherencyGrouping& g) {
    json arr = json::array();
    for (const auto& names : g.groups) arr.push_back(names);
    return arr;
}

void write_groupings(const std::vector<WindowResult>& results, Metric metric, const fs::path& path) {
    json doc = json::array();
    for (const auto& r : results) {
        doc.push_back({{"t_ref", r.window.end},
                       {"metric", to_string(metric)},
                       {"cut_height", r.grouping.cut_height},
                       {"groups", groups_json(r.grouping)}});
    }
    std::ofstream(path) << doc.dump(1) << '\n';
}

void write_dendrograms(const std::vector<WindowResult>& results, const fs::path& path) {
    std::ofstream f(path);
    f << "t_ref,merge,cluster_a,cluster_b,height,size\n";
    for (const auto& r : results) {
        for (std::size_t k = 0; k < r.dendrogram.merges.size(); ++k) {
            const auto& m = r.dendrogram.merges[k];
            f << fmt(r.window.end) << ',' << k << ',' << m.a << ',' << m.b << ',' << fmt(m.height) << ',' << m.size
              << '\n';
        }
    }
}

std::vector<WindowResult> run_analysis(const RunConfig& cfg, Metric metric, const RotorTrajectory& traj) {
    AnalysisOptions a = analysis_options(cfg, metric);
    if (!cfg.freeze_grouping.empty()) a.frozen_groups = load_frozen(cfg.freeze_grouping);
    return analyze_windows(traj, a);
}

void do_analyze(const RunConfig& cfg, Metric metric, std::ostream& out) {
    const RotorTrajectory traj = load_trajectory(cfg, metric);
    const auto results = run_analysis(cfg, metric, traj);
    const std::string m = to_string(metric);
    write_groupings(results, metric, cfg.out / ("groupings_" + m + ".json"));
    write_dendrograms(results, cfg.out / ("dendrogram_" + m + ".csv"));
    out << m << ": " << results.size() << " windows, final grouping";
    for (const auto& g : results.back().grouping.groups) {
        out << " {";
        for (std::size_t i = 0; i < g.size(); ++i) out << (i ? "," : "") << g[i];
        out << '}';
    }
    out << '\n';
}

// Replaces each window's grouping with the one recorded in a groupings file.
void apply_recorded_groupings(std::vector<WindowResult>& results, const RotorTrajectory& traj, Metric metric,
                              const fs::path& file) {
    const json doc = read_json(file, "groupings");
    if (!doc.is_array() || doc.size() != results.size()) {
        throw InputError("groupings file " + file.string() + " does not match the analysis windows");
    }
    for (std::size_t k = 0; k < results.size(); ++k) {
        const auto& rec = doc[k];
        try {
            const double t = rec.at("t_ref").get<double>();
            if (std::abs(t - results[k].window.end) > 1e-6) {
                throw InputError("groupings file " + file.string() + ": window " + std::to_string(k) +
                                 " has t_ref " + fmt(t) + ", expected " + fmt(results[k].window.end));
            }
            const auto groups = rec.at("groups").get<std::vector<std::vector<std::string>>>();
            results[k].grouping =
                grouping_from_labels(groups, traj.machine_labels, metric, rec.value("cut_height", 0.0));
        } catch (const json::exception& e) {
            throw InputError("groupings file " + file.string() + ": " + e.what());
        }
        results[k].indices = index_sample(results[k].similarity, results[k].grouping);
    }
}

void write_indices(const std::vector<WindowResult>& results, Metric metric, bool sf_literal, const fs::path& dir) {
    const std::string m = to_string(metric);
    std::size_t max_groups = 0;
    for (const auto& r : results) max_groups = std::max(max_groups, r.grouping.group_count());

    std::ofstream f(dir / ("indices_" + m + ".csv"));
    std::ofstream fcf(dir / ("fig_cf_" + m + ".csv"));
    std::ofstream fsf(dir / ("fig_sf_" + m + ".csv"));
    std::ofstream fratio(dir / ("fig_cf_sf_" + m + ".csv"));
    std::ofstream flap(dir / ("laplacian_" + m + ".csv"));

    f << "time_s,CF,SF,CF_SF,n_groups";
    flap << "time_s";
    for (std::size_t g = 1; g <= max_groups; ++g) {
        f << ",CF_g" << g;
        flap << ",lambda_" << g;
    }
    f << ",singletons";
    if (sf_literal) f << ",SF_literal";
    f << '\n';
    flap << '\n';
    fcf << "time_s,CF\n";
    fsf << "time_s,SF\n";
    fratio << "time_s,CF_SF\n";

    for (const auto& r : results) {
        const auto& s = r.indices;
        const std::string t = fmt(s.time);
        f << t << ',' << fmt(s.cf.aggregate) << ',' << fmt(s.sf) << ',' << fmt(s.cf_sf) << ','
          << r.grouping.group_count();
        for (std::size_t g = 0; g < max_groups; ++g) {
            f << ',';
            if (g < static_cast<std::size_t>(s.cf.per_group.size())) f << fmt(s.cf.per_group(static_cast<Eigen::Index>(g)));
        }
        f << ',';
        bool first = true;
        for (std::size_t g = 0; g < s.group_matrix.singleton.size(); ++g) {
            if (!s.group_matrix.singleton[g]) continue;
            f << (first ? "" : ";") << 'g' << g + 1;
            first = false;
        }
        if (sf_literal) f << ',' << fmt(s.sf_literal);
        f << '\n';

        fcf << t << ',' << fmt(s.cf.aggregate) << '\n';
        fsf << t << ',' << fmt(s.sf) << '\n';
        fratio << t << ',' << fmt(s.cf_sf) << '\n';

        const auto eig = laplacian_eigs(s.group_matrix);
        flap << t;
        for (std::size_t g = 0; g < max_groups; ++g) {
            flap << ',';
            if (g < eig.size()) flap << fmt(eig[g]);
        }
        flap << '\n';
    }
}

void do_indices(const RunConfig& cfg, Metric metric, std::ostream& out) {
    const RotorTrajectory traj = load_trajectory(cfg, metric);
    auto results = run_analysis(cfg, metric, traj);
    if (!cfg.groupings.empty() && cfg.freeze_grouping.empty()) {
        apply_recorded_groupings(results, traj, metric, cfg.groupings);
    }
    write_indices(results, metric, cfg.sf_literal, cfg.out);
    const auto& last = results.back().indices;
    out << to_string(metric) << ": final CF=" << fmt(last.cf.aggregate) << " SF=" << fmt(last.sf)
        << " CF/SF=" << fmt(last.cf_sf) << '\n';
}

void plan_analyze(OutputPlan& plan, Metric m) {
    plan.add(std::string("groupings_") + to_string(m) + ".json");
    plan.add(std::string("dendrogram_") + to_string(m) + ".csv");
}

void plan_indices(OutputPlan& plan, Metric m) {
    const std::string s = to_string(m);
    for (const char* stem : {"indices_", "fig_cf_", "fig_sf_", "fig_cf_sf_", "laplacian_"}) plan.add(stem + s + ".csv");
}

void plan_simulate(OutputPlan& plan, const RunConfig& cfg) {
    plan.add("trajectory.csv");
    plan.add("epochs.json");
    plan.add("loss_of_sync.csv");
    if (cfg.dump_pf) plan.add("powerflow.csv");
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json input_doc(const Input& in, const char* what) {
    if (in.empty()) return nullptr;
    if (!in.inline_doc.is_null()) return in.inline_doc;
    return read_json(in.path, what);
}

void write_manifest(const RunConfig& cfg, const OutputPlan& plan, const SimulateResult& sim) {
    json config = {
        {"case", input_doc(cfg.case_input, "case")},
        {"events", input_doc(cfg.events_input, "events")},
        {"dt", cfg.dt},
        {"t_stop", cfg.t_stop},
        {"sample_dt", cfg.sample_dt},
        {"damping", cfg.damping ? json(*cfg.damping) : json(nullptr)},
        {"metric", metrics_json(cfg.metrics)},
        {"window_length", cfg.windows.length_s},
        {"window_step", cfg.windows.step_s},
        {"linkage", to_string(cfg.linkage)},
        {"cut", to_string(cfg.cut)},
        {"sf_literal", cfg.sf_literal},
        {"dump_pf", cfg.dump_pf},
    };
    if (!cfg.freeze_grouping.empty()) config["freeze_grouping"] = load_frozen(cfg.freeze_grouping);

    json doc = {
        {"tool", "coherency-lab"},
        {"version", kVersion},
        {"command", "pipeline"},
        {"created_utc", utc_now()},
        {"sources", {{"case", cfg.case_input.describe()}, {"events", cfg.events_input.describe()}}},
        {"config", config},
        {"outputs", plan.names()},
        {"results", {{"loss_of_sync_pairs", sim.loss_pairs}}},
    };
    std::ofstream(cfg.out / "manifest.json") << doc.dump(2) << '\n';
}

struct Flags {
    std::string config, case_path, events, metric, linkage, cut, out, trajectory, epochs, groupings, freeze;
    double dt = 0, t_stop = 0, sample_dt = 0, window_length = 0, window_step = 0, damping = 0;
    bool force = false, sf_literal = false, dump_pf = false;
};

using OptionMap = std::map<std::string, CLI::Option*>;

void add_sim_options(CLI::App* sub, Flags& f, OptionMap& o) {
    o["case"] = sub->add_option("--case", f.case_path, "network case file (JSON)");
    o["events"] = sub->add_option("--events", f.events, "event schedule file (JSON)");
    o["dt"] = sub->add_option("--dt", f.dt, "integration step, s [0.001]");
    o["t_stop"] = sub->add_option("--t-stop", f.t_stop, "simulated duration, s [10]");
    o["sample_dt"] = sub->add_option("--sample-dt", f.sample_dt, "trajectory sampling interval, s [0.01]");
    o["damping"] = sub->add_option("--damping", f.damping, "damping D for every machine, pu (overrides the case)");
    o["dump_pf"] = sub->add_flag("--dump-pf", f.dump_pf, "also write the solved power flow");
}

void add_analysis_options(CLI::App* sub, Flags& f, OptionMap& o) {
    o["metric"] = sub->add_option("--metric", f.metric, "cc, ks, or a comma list / both [cc]");
    o["window_length"] = sub->add_option("--window-length", f.window_length, "window length, s [2]");
    o["window_step"] = sub->add_option("--window-step", f.window_step, "window hop, s [0.1]");
    o["linkage"] = sub->add_option("--linkage", f.linkage, "single, complete or average [average]");
    o["cut"] = sub->add_option("--cut", f.cut, "largest_gap, fixed_k:<k> or height:<h> [largest_gap]");
}

void add_trajectory_options(CLI::App* sub, Flags& f, OptionMap& o) {
    o["trajectory"] = sub->add_option("--trajectory", f.trajectory, "trajectory CSV");
    o["epochs"] = sub->add_option("--epochs", f.epochs, "epochs sidecar JSON (needed for ks)");
}

void add_index_options(CLI::App* sub, Flags& f, OptionMap& o) {
    o["sf_literal"] = sub->add_flag("--sf-literal", f.sf_literal, "add the alternate-form SF column");
    o["freeze"] = sub->add_option("--freeze-grouping", f.freeze, "fixed grouping file used for every window");
}

void add_common(CLI::App* sub, Flags& f, OptionMap& o) {
    o["config"] = sub->add_option("--config", f.config, "JSON run configuration (flags override it)");
    o["out"] = sub->add_option("--out", f.out, "output directory [out]");
    o["force"] = sub->add_flag("--force", f.force, "overwrite existing outputs");
}

RunConfig merge(const Flags& f, const OptionMap& o) {
    RunConfig cfg;
    auto given = [&](const char* k) {
        const auto it = o.find(k);
        return it != o.end() && it->second->count() > 0;
    };
    if (given("config")) apply_config_file(cfg, resolve_input(f.config, {}));

    if (given("case")) cfg.case_input = {resolve_input(f.case_path, {}), json()};
    if (given("events")) cfg.events_input = {resolve_input(f.events, {}), json()};
    if (given("dt")) cfg.dt = f.dt;
    if (given("t_stop")) cfg.t_stop = f.t_stop;
    if (given("sample_dt")) cfg.sample_dt = f.sample_dt;
    if (given("damping")) cfg.damping = f.damping;
    if (given("dump_pf")) cfg.dump_pf = f.dump_pf;
    if (given("metric")) cfg.metrics = as_usage([&] { return parse_metrics(f.metric); });
    if (given("window_length")) cfg.windows.length_s = f.window_length;
    if (given("window_step")) cfg.windows.step_s = f.window_step;
    if (given("linkage")) cfg.linkage = as_usage([&] { return parse_linkage(f.linkage); });
    if (given("cut")) cfg.cut = as_usage([&] { return parse_cut(f.cut); });
    if (given("out")) cfg.out = f.out;
    if (given("force")) cfg.force = f.force;
    if (given("sf_literal")) cfg.sf_literal = f.sf_literal;
    if (given("trajectory")) cfg.trajectory = resolve_input(f.trajectory, {});
    if (given("epochs")) cfg.epochs = resolve_input(f.epochs, {});
    if (given("groupings")) cfg.groupings = resolve_input(f.groupings, {});
    if (given("freeze")) cfg.freeze_grouping = {resolve_input(f.freeze, {}), json()};

    if (cfg.case_input.empty()) cfg.case_input = {resolve_input("ieee39.case", {}), json()};
    check_ranges(cfg);
    return cfg;
}

int dispatch(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    OutputPlan plan(cfg.out, cfg.force);
    if (command == "simulate") {
        plan_simulate(plan, cfg);
        plan.check();
        do_simulate(cfg, plan, out, err);
    } else if (command == "analyze") {
        for (auto m : cfg.metrics) plan_analyze(plan, m);
        plan.prepare();
        for (auto m : cfg.metrics) do_analyze(cfg, m, out);
    } else if (command == "indices") {
        for (auto m : cfg.metrics) plan_indices(plan, m);
        plan.prepare();
        for (auto m : cfg.metrics) do_indices(cfg, m, out);
    } else {
        plan_simulate(plan, cfg);
        for (auto m : cfg.metrics) {
            plan_analyze(plan, m);
            plan_indices(plan, m);
        }
        plan.add("manifest.json");
        plan.check();
        const SimulateResult sim = do_simulate(cfg, plan, out, err);

        // Later stages read the intermediate files back, exactly as separate invocations would.
        RunConfig next = cfg;
        next.trajectory = cfg.out / "trajectory.csv";
        next.epochs = cfg.out / "epochs.json";
        for (auto m : cfg.metrics) {
            do_analyze(next, m, out);
            RunConfig idx = next;
            if (idx.freeze_grouping.empty()) idx.groupings = cfg.out / (std::string("groupings_") + to_string(m) + ".json");
            do_indices(idx, m, out);
        }
        write_manifest(cfg, plan, sim);
    }
    for (const auto& n : plan.names()) out << "wrote " << (cfg.out / n).string() << '\n';
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Transient-stability coherency workbench: swing simulation, coherency grouping and CF/SF indices",
                 "coherency-lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Flags f;
    std::map<std::string, OptionMap> opts;

    auto* sim = app.add_subcommand("simulate", "run a scenario and write trajectory.csv, epochs.json, loss_of_sync.csv");
    add_common(sim, f, opts["simulate"]);
    add_sim_options(sim, f, opts["simulate"]);

    auto* ana = app.add_subcommand("analyze", "cluster windows of a trajectory into coherent groups");
    add_common(ana, f, opts["analyze"]);
    add_trajectory_options(ana, f, opts["analyze"]);
    add_analysis_options(ana, f, opts["analyze"]);
    opts["analyze"]["freeze"] = ana->add_option("--freeze-grouping", f.freeze, "fixed grouping file used for every window");

    auto* ind = app.add_subcommand("indices", "compute CF, SF and CF/SF per window");
    add_common(ind, f, opts["indices"]);
    add_trajectory_options(ind, f, opts["indices"]);
    add_analysis_options(ind, f, opts["indices"]);
    add_index_options(ind, f, opts["indices"]);
    opts["indices"]["groupings"] = ind->add_option("--groupings", f.groupings, "groupings file from analyze");

    auto* pipe = app.add_subcommand("pipeline", "simulate, analyze and compute indices, plus manifest.json");
    add_common(pipe, f, opts["pipeline"]);
    add_sim_options(pipe, f, opts["pipeline"]);
    add_analysis_options(pipe, f, opts["pipeline"]);
    add_index_options(pipe, f, opts["pipeline"]);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const RunConfig cfg = merge(f, opts[command]);
        return dispatch(command, cfg, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

}  // namespace cohlab
