#include "qwalk/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace qwalk {
namespace io {

using nlohmann::json;

std::string ConfigError::format(int line, const std::string& what) {
    std::ostringstream msg;
    if (line > 0) msg << "line " << line << ": ";
    msg << what;
    return msg.str();
}

std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

// ---------------------------------------------------------------------------
// config file parsing
// ---------------------------------------------------------------------------

namespace {

struct Entry {
    std::string key, value;
    int line = 0;
};

struct Section {
    std::string name;
    int line = 0;
    std::vector<Entry> entries;
};

struct RawConfig {
    std::vector<Entry> top;        // keys before any section header
    std::vector<Section> sections; // in file order
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

RawConfig tokenize(const std::string& text) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(lineno, "unterminated section header");
            raw.sections.push_back({trim(line.substr(1, line.size() - 2)), lineno, {}});
            if (raw.sections.back().name.empty())
                throw ConfigError(lineno, "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(lineno, "expected key = value");
        Entry e{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno};
        if (e.key.empty()) throw ConfigError(lineno, "empty key");
        if (raw.sections.empty())
            raw.top.push_back(std::move(e));
        else
            raw.sections.back().entries.push_back(std::move(e));
    }
    return raw;
}

/// Keyed access to one section; flags unknown keys at the end.
class SectionReader {
public:
    explicit SectionReader(const Section& s) : section_(s), used_(s.entries.size(), false) {}

    const Entry* find(const std::string& key) {
        for (std::size_t i = 0; i < section_.entries.size(); ++i) {
            if (section_.entries[i].key == key) {
                used_[i] = true;
                return &section_.entries[i];
            }
        }
        return nullptr;
    }

    std::string require(const std::string& key) {
        const Entry* e = find(key);
        if (!e)
            throw ConfigError(section_.line, "section [" + section_.name +
                                                 "] is missing key '" + key + "'");
        return e->value;
    }

    std::optional<std::string> optional(const std::string& key) {
        const Entry* e = find(key);
        return e ? std::optional<std::string>(e->value) : std::nullopt;
    }

    int line_of(const std::string& key) const {
        for (const auto& e : section_.entries)
            if (e.key == key) return e.line;
        return section_.line;
    }

    void finish() const {
        for (std::size_t i = 0; i < section_.entries.size(); ++i)
            if (!used_[i])
                throw ConfigError(section_.entries[i].line,
                                  "unknown key '" + section_.entries[i].key +
                                      "' in section [" + section_.name + "]");
    }

private:
    const Section& section_;
    std::vector<bool> used_;
};

double parse_double(const std::string& v, int line) {
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(line, "expected a number, got '" + v + "'");
    }
    if (pos != v.size()) throw ConfigError(line, "trailing junk after number in '" + v + "'");
    return out;
}

int parse_int(const std::string& v, int line) {
    const double d = parse_double(v, line);
    if (d != std::floor(d) || std::abs(d) > 1e9)
        throw ConfigError(line, "expected an integer, got '" + v + "'");
    return static_cast<int>(d);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string token;
    for (char c : v) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!token.empty()) out.push_back(std::move(token));
            token.clear();
        } else {
            token.push_back(c);
        }
    }
    if (!token.empty()) out.push_back(std::move(token));
    return out;
}

/// Site lists accept single indices and a..b ranges: "1 2 5..8".
std::set<int> parse_site_set(const std::string& v, int line) {
    std::set<int> out;
    for (const auto& tok : split_list(v)) {
        const auto dots = tok.find("..");
        if (dots == std::string::npos) {
            out.insert(parse_int(tok, line));
        } else {
            const int a = parse_int(tok.substr(0, dots), line);
            const int b = parse_int(tok.substr(dots + 2), line);
            if (b < a) throw ConfigError(line, "empty range '" + tok + "'");
            for (int s = a; s <= b; ++s) out.insert(s);
        }
    }
    if (out.empty()) throw ConfigError(line, "empty site list");
    return out;
}

Statistics parse_statistics(const std::string& v, int line) {
    if (v == "fermion") return Statistics::Fermion;
    if (v == "boson") return Statistics::Boson;
    throw ConfigError(line, "statistics must be 'fermion' or 'boson', got '" + v + "'");
}

std::pair<int, int> parse_pair(const std::string& v, int line) {
    const auto toks = split_list(v);
    if (toks.size() != 2) throw ConfigError(line, "expected two site indices, got '" + v + "'");
    return {parse_int(toks[0], line), parse_int(toks[1], line)};
}

RingConfig read_ring_config(SectionReader& sec) {
    RingConfig ring;
    ring.n_sites = parse_int(sec.require("n_sites"), sec.line_of("n_sites"));
    ring.statistics = parse_statistics(sec.require("statistics"), sec.line_of("statistics"));
    if (auto g = sec.optional("gamma")) ring.gamma = parse_double(*g, sec.line_of("gamma"));
    try {
        ring.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(sec.line_of("n_sites"), e.what());
    }
    return ring;
}

ContinuumConfig read_continuum_config(SectionReader& sec, int section_line) {
    ContinuumConfig cfg;
    const std::string scenario = sec.optional("scenario").value_or("custom");
    if (scenario == "comoving") {
        cfg = continuum_preset(ContinuumScenario::Comoving, Statistics::Fermion);
    } else if (scenario == "collision") {
        cfg = continuum_preset(ContinuumScenario::Collision, Statistics::Fermion);
    } else if (scenario != "custom") {
        throw ConfigError(sec.line_of("scenario"),
                          "scenario must be comoving, collision or custom");
    }
    auto override_key = [&](const char* key, double& field) {
        if (auto v = sec.optional(key)) field = parse_double(*v, sec.line_of(key));
    };
    override_key("mass_kg", cfg.mass_kg);
    override_key("sigma_nm", cfg.sigma_nm);
    override_key("x0_nm", cfg.x0_nm);
    override_key("ek1_mev", cfg.ek1_mev);
    override_key("ek2_mev", cfg.ek2_mev);
    override_key("half_length_nm", cfg.half_length_nm);
    override_key("dx_nm", cfg.dx_nm);
    override_key("dt_fs", cfg.dt_fs);
    override_key("t_max_fs", cfg.t_max_fs);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(section_line, e.what());
    }
    return cfg;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    const RawConfig raw = tokenize(text);
    ExperimentConfig cfg;

    std::string mode;
    for (const auto& e : raw.top) {
        if (e.key == "mode") mode = e.value;
        else throw ConfigError(e.line, "unknown top-level key '" + e.key + "'");
    }
    if (mode == "ring") cfg.mode = ExperimentConfig::Mode::Ring;
    else if (mode == "continuum") cfg.mode = ExperimentConfig::Mode::Continuum;
    else if (mode == "ring_sweep") cfg.mode = ExperimentConfig::Mode::RingSweep;
    else throw ConfigError(1, "mode must be ring, continuum or ring_sweep");

    bool saw_grid = false;
    for (const auto& section : raw.sections) {
        SectionReader sec(section);
        if (section.name == "grid") {
            if (cfg.mode != ExperimentConfig::Mode::Ring)
                throw ConfigError(section.line, "[grid] only applies to ring mode");
            cfg.gt_min = parse_double(sec.require("gt_min"), sec.line_of("gt_min"));
            cfg.gt_max = parse_double(sec.require("gt_max"), sec.line_of("gt_max"));
            cfg.gt_points = parse_int(sec.require("gt_points"), sec.line_of("gt_points"));
            if (!(cfg.gt_max > cfg.gt_min) || cfg.gt_points < 2)
                throw ConfigError(section.line, "[grid] needs gt_max > gt_min and gt_points >= 2");
            saw_grid = true;
        } else if (section.name.starts_with("series.")) {
            if (cfg.mode != ExperimentConfig::Mode::Ring)
                throw ConfigError(section.line, "[series.*] only applies to ring mode");
            RingSeriesSpec spec;
            spec.name = section.name.substr(7);
            spec.ring = read_ring_config(sec);
            spec.initial = parse_pair(sec.require("initial"), sec.line_of("initial"));
            spec.alice = parse_site_set(sec.require("alice"), sec.line_of("alice"));
            if (auto q = sec.optional("quantity")) {
                if (*q == "ep") spec.quantity = RingSeriesSpec::Quantity::Ep;
                else if (*q == "p1") spec.quantity = RingSeriesSpec::Quantity::P1;
                else if (*q == "entropy") spec.quantity = RingSeriesSpec::Quantity::Entropy;
                else throw ConfigError(sec.line_of("quantity"),
                                       "quantity must be ep, p1 or entropy");
            }
            for (int site : {spec.initial.first, spec.initial.second})
                if (site < 1 || site > spec.ring.n_sites)
                    throw ConfigError(sec.line_of("initial"), "initial site outside [1, N]");
            try {
                (void)Partition(spec.ring.n_sites, spec.alice);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(sec.line_of("alice"), e.what());
            }
            cfg.series.push_back(std::move(spec));
        } else if (section.name.starts_with("gamma.")) {
            if (cfg.mode != ExperimentConfig::Mode::Ring)
                throw ConfigError(section.line, "[gamma.*] only applies to ring mode");
            GammaSpec spec;
            spec.name = section.name.substr(6);
            spec.ring = read_ring_config(sec);
            spec.initial = parse_pair(sec.require("initial"), sec.line_of("initial"));
            for (const auto& tok : split_list(sec.require("gt_list"))) {
                const double gt = parse_double(tok, sec.line_of("gt_list"));
                if (gt < 0.0)
                    throw ConfigError(sec.line_of("gt_list"), "gt values must be >= 0");
                spec.gt_list.push_back(gt);
            }
            if (spec.gt_list.empty())
                throw ConfigError(sec.line_of("gt_list"), "gt_list is empty");
            cfg.gamma_maps.push_back(std::move(spec));
        } else if (section.name.starts_with("run.")) {
            if (cfg.mode != ExperimentConfig::Mode::Continuum)
                throw ConfigError(section.line, "[run.*] only applies to continuum mode");
            ContinuumRunSpec spec;
            spec.name = section.name.substr(4);
            const std::string stats = sec.optional("statistics").value_or("both");
            if (stats == "both") {
                spec.run_fermion = spec.run_boson = true;
            } else {
                const Statistics s = parse_statistics(stats, sec.line_of("statistics"));
                spec.run_fermion = s == Statistics::Fermion;
                spec.run_boson = s == Statistics::Boson;
            }
            spec.file = sec.optional("file").value_or(spec.name + ".csv");
            if (auto v = sec.optional("output_every_fs"))
                spec.output_every_fs = parse_double(*v, sec.line_of("output_every_fs"));
            spec.base = read_continuum_config(sec, section.line);
            const double ratio = spec.output_every_fs / spec.base.dt_fs;
            if (spec.output_every_fs <= 0.0 ||
                std::abs(ratio - std::llround(ratio)) > 1e-9)
                throw ConfigError(section.line,
                                  "output_every_fs must be a positive multiple of dt_fs");
            cfg.continuum_runs.push_back(std::move(spec));
        } else if (section.name == "sweep") {
            if (cfg.mode != ExperimentConfig::Mode::RingSweep)
                throw ConfigError(section.line, "[sweep] only applies to ring_sweep mode");
            for (const auto& tok : split_list(sec.require("n_values")))
                cfg.sweep.n_values.push_back(parse_int(tok, sec.line_of("n_values")));
            if (cfg.sweep.n_values.empty())
                throw ConfigError(sec.line_of("n_values"), "n_values is empty");
            for (int n : cfg.sweep.n_values)
                if (n < 2 || n % 2 != 0)
                    throw ConfigError(sec.line_of("n_values"), "n_values must be even and >= 2");
            for (const auto& tok : split_list(sec.require("statistics")))
                cfg.sweep.statistics.push_back(
                    parse_statistics(tok, sec.line_of("statistics")));
            if (auto v = sec.optional("gt_step")) {
                cfg.sweep.gt_step = parse_double(*v, sec.line_of("gt_step"));
                if (!(cfg.sweep.gt_step > 0.0))
                    throw ConfigError(sec.line_of("gt_step"), "gt_step must be positive");
            }
            if (auto v = sec.optional("file")) cfg.sweep.file = *v;
        } else if (section.name == "output") {
            if (auto v = sec.optional("dir")) cfg.out_dir = *v;
            if (auto v = sec.optional("file")) cfg.ring_file = *v;
            if (auto v = sec.optional("prefix")) cfg.prefix = *v;
        } else {
            throw ConfigError(section.line, "unknown section [" + section.name + "]");
        }
        sec.finish();
    }

    switch (cfg.mode) {
        case ExperimentConfig::Mode::Ring:
            if (cfg.series.empty() && cfg.gamma_maps.empty())
                throw ConfigError(1, "ring mode needs at least one [series.*] or [gamma.*]");
            if (!cfg.series.empty() && !saw_grid)
                throw ConfigError(1, "ring mode with series needs a [grid] section");
            if (!cfg.series.empty() && cfg.ring_file.empty())
                throw ConfigError(1, "ring mode with series needs [output] file");
            if (!cfg.gamma_maps.empty() && cfg.prefix.empty())
                throw ConfigError(1, "gamma maps need [output] prefix");
            break;
        case ExperimentConfig::Mode::Continuum:
            if (cfg.continuum_runs.empty())
                throw ConfigError(1, "continuum mode needs at least one [run.*]");
            break;
        case ExperimentConfig::Mode::RingSweep:
            if (cfg.sweep.n_values.empty())
                throw ConfigError(1, "ring_sweep mode needs a [sweep] section");
            break;
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// emission
// ---------------------------------------------------------------------------

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path.string());
    return out;
}

void write_json_sidecar(const std::filesystem::path& csv_path, const json& meta) {
    auto out = open_output(csv_path.string() + ".json");
    out << meta.dump(2) << "\n";
    if (!out) throw IoError("failed writing " + csv_path.string() + ".json");
}

std::string gt_tag(double gt) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", gt);
    std::string tag(buf);
    std::replace(tag.begin(), tag.end(), '.', 'p');
    std::replace(tag.begin(), tag.end(), '-', 'm');
    return tag;
}

std::vector<double> make_grid(double lo, double hi, int points) {
    std::vector<double> grid(points);
    const double step = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i) grid[i] = lo + i * step;
    return grid;
}

} // namespace

void emit_gamma_map(const PairState& state, const std::filesystem::path& path,
                    std::pair<int, int> initial) {
    const double canonical_sum = state.norm_sq();
    if (std::abs(canonical_sum - 1.0) > 1e-9)
        throw NumericalError("emit_gamma_map: state norm " + std::to_string(canonical_sum));

    const Eigen::MatrixXd gamma = correlation_map(state);
    const int n = state.basis.n_sites();
    auto out = open_output(path);
    out << "k";
    for (int j = 1; j <= n; ++j) out << ",j" << j;
    out << "\n";
    for (int k = 0; k < n; ++k) {
        out << (k + 1);
        for (int j = 0; j < n; ++j) {
            // symmetrized convention: split each canonical off-diagonal weight
            const double v = k == j ? gamma(k, j) : 0.5 * gamma(k, j);
            out << ',' << csv_double(v);
        }
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());

    json meta;
    meta["n_sites"] = n;
    meta["statistics"] = to_string(state.basis.statistics());
    meta["gamma_t"] = state.gt;
    meta["initial_pair"] = {initial.first, initial.second};
    meta["convention"] = "symmetrized";
    write_json_sidecar(path, meta);
}

std::vector<SaturationRow> sweep_saturation(const SweepSpec& sweep) {
    std::vector<SaturationRow> rows;
    for (int n : sweep.n_values) {
        for (Statistics stats : sweep.statistics) {
            RingConfig ring{n, 1.0, stats};
            std::set<int> alice;
            for (int s = 1; s <= n / 2; ++s) alice.insert(s);
            const Partition part(n, alice);
            const double gt_max = 0.45 * n + 10.0;
            const int points = static_cast<int>(std::floor(gt_max / sweep.gt_step)) + 1;
            std::vector<double> grid(points);
            for (int i = 0; i < points; ++i) grid[i] = i * sweep.gt_step;
            const auto series =
                ep_time_series(ring, {n / 2, n / 2 + 1}, part, grid);
            rows.push_back({n, stats, estimate_saturation(series, n)});
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// executors
// ---------------------------------------------------------------------------

namespace {

void execute_ring(const ExperimentConfig& cfg) {
    const std::filesystem::path dir(cfg.out_dir);

    if (!cfg.series.empty()) {
        const auto grid = make_grid(cfg.gt_min, cfg.gt_max, cfg.gt_points);
        std::vector<std::vector<EpSample>> columns;
        for (const auto& spec : cfg.series) {
            const Partition part(spec.ring.n_sites, spec.alice);
            columns.push_back(ep_time_series(spec.ring, spec.initial, part, grid));
        }
        auto out = open_output(dir / cfg.ring_file);
        out << "gamma_t";
        for (const auto& spec : cfg.series) out << ',' << spec.name;
        out << "\n";
        for (int i = 0; i < cfg.gt_points; ++i) {
            out << csv_double(grid[i]);
            for (std::size_t c = 0; c < columns.size(); ++c) {
                const EpSample& s = columns[c][i];
                // re-validate sector probabilities before emitting the row
                if (std::abs(s.p0 + s.p1 + s.p2 - 1.0) > 1e-12 || s.p1 < -1e-15)
                    throw NumericalError("ring series: sector weights do not sum to 1 at gt=" +
                                         std::to_string(s.gt));
                double v = s.ep;
                if (cfg.series[c].quantity == RingSeriesSpec::Quantity::P1) v = s.p1;
                if (cfg.series[c].quantity == RingSeriesSpec::Quantity::Entropy) v = s.entropy;
                out << ',' << csv_double(v);
            }
            out << "\n";
        }
        if (!out) throw IoError("failed writing " + (dir / cfg.ring_file).string());

        json meta;
        meta["mode"] = "ring";
        meta["gt_min"] = cfg.gt_min;
        meta["gt_max"] = cfg.gt_max;
        meta["gt_points"] = cfg.gt_points;
        json cols = json::array();
        for (const auto& spec : cfg.series) {
            json c;
            c["name"] = spec.name;
            c["n_sites"] = spec.ring.n_sites;
            c["statistics"] = to_string(spec.ring.statistics);
            c["initial_pair"] = {spec.initial.first, spec.initial.second};
            c["alice"] = std::vector<int>(spec.alice.begin(), spec.alice.end());
            c["quantity"] = spec.quantity == RingSeriesSpec::Quantity::Ep ? "ep"
                            : spec.quantity == RingSeriesSpec::Quantity::P1 ? "p1"
                                                                            : "entropy";
            cols.push_back(c);
        }
        meta["series"] = cols;
        write_json_sidecar(dir / cfg.ring_file, meta);
    }

    for (const auto& spec : cfg.gamma_maps) {
        for (double gt : spec.gt_list) {
            const PairState state = evolve(spec.ring, spec.initial, gt);
            const auto file = cfg.prefix + "_" + spec.name + "_gt" + gt_tag(gt) + ".csv";
            emit_gamma_map(state, dir / file, spec.initial);
        }
    }
}

struct ContinuumRow {
    double t_fs = 0.0;
    double ep = 0.0, p1 = 0.0;
};

std::vector<ContinuumRow> drive_continuum(const ContinuumConfig& cfg,
                                          double output_every_fs) {
    const long total = std::llround(cfg.t_max_fs / cfg.dt_fs);
    const long every = std::llround(output_every_fs / cfg.dt_fs);
    ContinuumState state = initial_state(cfg);
    const CrankNicolson solver(cfg);

    std::vector<ContinuumRow> rows;
    auto observe = [&]() {
        const double norm_sq = field_norm_sq(state, cfg);
        if (std::abs(norm_sq - 1.0) > 1e-8)
            throw NumericalError("continuum: norm drift " +
                                 std::to_string(std::abs(norm_sq - 1.0)) + " at t=" +
                                 std::to_string(state.t_fs(cfg)) + " fs");
        const double sym = exchange_residual(state);
        if (sym > 1e-8)
            throw NumericalError("continuum: exchange-symmetry residual " +
                                 std::to_string(sym));
        const EpLinear ep = ep_linear(state, cfg);
        rows.push_back({state.t_fs(cfg), ep.ep, ep.p1});
    };

    observe();
    for (long s = 1; s <= total; ++s) {
        solver.step(state);
        if (s % every == 0 || s == total) observe();
    }
    return rows;
}

void execute_continuum(const ExperimentConfig& cfg) {
    const std::filesystem::path dir(cfg.out_dir);
    for (const auto& spec : cfg.continuum_runs) {
        std::vector<ContinuumRow> fermion_rows, boson_rows;
        if (spec.run_fermion) {
            ContinuumConfig c = spec.base;
            c.statistics = Statistics::Fermion;
            fermion_rows = drive_continuum(c, spec.output_every_fs);
        }
        if (spec.run_boson) {
            ContinuumConfig c = spec.base;
            c.statistics = Statistics::Boson;
            boson_rows = drive_continuum(c, spec.output_every_fs);
        }

        auto out = open_output(dir / spec.file);
        out << "t_fs";
        if (spec.run_fermion) out << ",ep_fermion,p1_fermion";
        if (spec.run_boson) out << ",ep_boson,p1_boson";
        out << "\n";
        const std::size_t count =
            spec.run_fermion ? fermion_rows.size() : boson_rows.size();
        for (std::size_t i = 0; i < count; ++i) {
            const double t = spec.run_fermion ? fermion_rows[i].t_fs : boson_rows[i].t_fs;
            out << csv_double(t);
            if (spec.run_fermion)
                out << ',' << csv_double(fermion_rows[i].ep) << ','
                    << csv_double(fermion_rows[i].p1);
            if (spec.run_boson)
                out << ',' << csv_double(boson_rows[i].ep) << ','
                    << csv_double(boson_rows[i].p1);
            out << "\n";
        }
        if (!out) throw IoError("failed writing " + (dir / spec.file).string());

        json meta;
        meta["mode"] = "continuum";
        meta["mass_kg"] = spec.base.mass_kg;
        meta["sigma_nm"] = spec.base.sigma_nm;
        meta["x0_nm"] = spec.base.x0_nm;
        meta["ek1_mev"] = spec.base.ek1_mev;
        meta["ek2_mev"] = spec.base.ek2_mev;
        meta["half_length_nm"] = spec.base.half_length_nm;
        meta["dx_nm"] = spec.base.dx_nm;
        meta["dt_fs"] = spec.base.dt_fs;
        meta["t_max_fs"] = spec.base.t_max_fs;
        meta["output_every_fs"] = spec.output_every_fs;
        meta["alice"] = "x < 0";
        meta["entropy"] = "linear";
        write_json_sidecar(dir / spec.file, meta);
    }
}

void execute_sweep(const ExperimentConfig& cfg) {
    const auto rows = sweep_saturation(cfg.sweep);
    const std::filesystem::path path = std::filesystem::path(cfg.out_dir) / cfg.sweep.file;
    auto out = open_output(path);
    out << "n_sites,statistics,gamma_tau,plateau_level,found\n";
    for (const auto& row : rows) {
        const double tau = row.estimate.found
                               ? row.estimate.gamma_tau
                               : std::numeric_limits<double>::quiet_NaN();
        out << row.n_sites << ',' << to_string(row.statistics) << ','
            << csv_double(tau) << ',' << csv_double(row.estimate.plateau_level) << ','
            << (row.estimate.found ? 1 : 0) << "\n";
    }
    if (!out) throw IoError("failed writing " + path.string());

    json meta;
    meta["mode"] = "ring_sweep";
    meta["n_values"] = cfg.sweep.n_values;
    meta["gt_step"] = cfg.sweep.gt_step;
    meta["partition"] = "half ring";
    meta["initial"] = "adjacent straddling (N/2, N/2+1)";
    write_json_sidecar(path, meta);
}

} // namespace

void execute(const ExperimentConfig& cfg) {
    switch (cfg.mode) {
        case ExperimentConfig::Mode::Ring: execute_ring(cfg); break;
        case ExperimentConfig::Mode::Continuum: execute_continuum(cfg); break;
        case ExperimentConfig::Mode::RingSweep: execute_sweep(cfg); break;
    }
}

// ---------------------------------------------------------------------------
// presets and entry points
// ---------------------------------------------------------------------------

const std::map<std::string, std::string>& preset_texts() {
    static const std::map<std::string, std::string> presets = [] {
        std::map<std::string, std::string> m;
        m["fig1"] = R"(# N=4 ring: E_P(gamma t) for input states |12> and |13>, Alice = {1,2}.
# Chosen here: 1024-point grid on [0, 2pi]; fermion statistics emitted
# (E_P is statistics-independent for this partition).
mode = ring

[grid]
gt_min = 0
gt_max = 6.283185307179586
gt_points = 1024

[series.ep_12]
n_sites = 4
statistics = fermion
initial = 1 2
alice = 1 2

[series.ep_13]
n_sites = 4
statistics = fermion
initial = 1 3
alice = 1 2

[output]
file = fig1.csv
)";
        m["fig2"] = R"(# E_P(gamma t) for N = 50, 70, 100, both statistics, half-ring partition,
# adjacent straddling initial state |N/2, N/2+1>.
# Chosen here: grid [0, 60], 1201 points.
mode = ring

[grid]
gt_min = 0
gt_max = 60
gt_points = 1201

[series.ep_fermion_n50]
n_sites = 50
statistics = fermion
initial = 25 26
alice = 1..25

[series.ep_fermion_n70]
n_sites = 70
statistics = fermion
initial = 35 36
alice = 1..35

[series.ep_fermion_n100]
n_sites = 100
statistics = fermion
initial = 50 51
alice = 1..50

[series.ep_boson_n50]
n_sites = 50
statistics = boson
initial = 25 26
alice = 1..25

[series.ep_boson_n70]
n_sites = 70
statistics = boson
initial = 35 36
alice = 1..35

[series.ep_boson_n100]
n_sites = 100
statistics = boson
initial = 50 51
alice = 1..50

[output]
file = fig2.csv
)";
        m["fig3"] = R"(# Two-particle correlation maps Gamma_kj on the N=70 ring, initial |35,36>,
# at gamma t = 0, 5, 10, 40, for fermions and bosons (eight files).
mode = ring

[gamma.fermion]
n_sites = 70
statistics = fermion
initial = 35 36
gt_list = 0 5 10 40

[gamma.boson]
n_sites = 70
statistics = boson
initial = 35 36
gt_list = 0 5 10 40

[output]
prefix = fig3
)";
        m["fig4"] = R"(# P1 and von Neumann entropy vs gamma t on the N=50 ring, both statistics,
# half-ring partition, initial |25,26>.
# Chosen here: grid [0, 30], 601 points.
mode = ring

[grid]
gt_min = 0
gt_max = 30
gt_points = 601

[series.p1_fermion]
n_sites = 50
statistics = fermion
initial = 25 26
alice = 1..25
quantity = p1

[series.entropy_fermion]
n_sites = 50
statistics = fermion
initial = 25 26
alice = 1..25
quantity = entropy

[series.p1_boson]
n_sites = 50
statistics = boson
initial = 25 26
alice = 1..25
quantity = p1

[series.entropy_boson]
n_sites = 50
statistics = boson
initial = 25 26
alice = 1..25
quantity = entropy

[output]
file = fig4.csv
)";
        m["fig5"] = R"(# Continuum E_P(t): Gaussian packets sigma = 5 nm at -+20 nm, m = 9.1e-31 kg.
# Co-moving run: E_k = 0, 2 ps. Collision run: E_k = 10 meV each, opposite
# directions, 1 ps.
# Chosen here: L = 200 nm, dx = 0.25 nm, dt = 0.25 fs, output cadences below.
mode = continuum

[run.comoving]
scenario = comoving
statistics = both
output_every_fs = 25
file = fig5_comoving.csv

[run.collision]
scenario = collision
statistics = both
output_every_fs = 12.5
file = fig5_collision.csv
)";
        m["saturation"] = R"(# Saturation interval gamma*tau vs lattice size, both statistics.
# Chosen here: estimator grid step 0.25 (see docs/formats.md for the estimator).
mode = ring_sweep

[sweep]
n_values = 50 70 100
statistics = fermion boson
gt_step = 0.25
file = saturation.csv
)";
        return m;
    }();
    return presets;
}

namespace {

int run_experiment(ExperimentConfig cfg, std::ostream& err,
                   const std::optional<std::string>& out_dir_override) {
    if (out_dir_override) cfg.out_dir = *out_dir_override;
    try {
        execute(cfg);
    } catch (const NumericalError& e) {
        err << "numerical invariant breach: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        err << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        err << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}

} // namespace

int run(const std::filesystem::path& config_path, std::ostream& err,
        const std::optional<std::string>& out_dir_override) {
    ExperimentConfig cfg;
    try {
        cfg = parse_config_file(config_path);
    } catch (const ConfigError& e) {
        err << config_path.string() << ":" << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kExitIo;
    }
    return run_experiment(std::move(cfg), err, out_dir_override);
}

int run_preset(const std::string& name, std::ostream& err,
               const std::optional<std::string>& out_dir_override) {
    const auto& presets = preset_texts();
    const auto it = presets.find(name);
    if (it == presets.end()) {
        err << "unknown preset '" << name << "'; available:";
        for (const auto& [key, text] : presets) err << ' ' << key;
        err << "\n";
        return kExitConfig;
    }
    ExperimentConfig cfg;
    try {
        cfg = parse_config_text(it->second);
    } catch (const ConfigError& e) {
        err << "preset " << name << ": " << e.what() << "\n";
        return kExitConfig;
    }
    return run_experiment(std::move(cfg), err, out_dir_override);
}

} // namespace io
} // namespace qwalk
