#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "collapse_lab/csv.hpp"
#include "collapse_lab/errors.hpp"
#include "collapse_lab/grid.hpp"
#include "collapse_lab/grw.hpp"
#include "collapse_lab/hamiltonian.hpp"
#include "collapse_lab/regions.hpp"
#include "collapse_lab/wavefunction.hpp"

namespace collapse_lab {

// Declarative description of one experiment, parsed from the INI-style
// scenario format. Sections: [grid], [initial], [dynamics], [process],
// [analysis], [run]. Unknown sections or keys are hard errors.
struct ScenarioConfig {
    struct Grid {
        int particles = 1;
        int points = 256;
        double length = 20.0;
        std::vector<double> masses{1.0};
        std::uint64_t max_cells = GridSpec::kDefaultMaxCells;
    } grid;

    struct Branch {
        double coeff = 1.0;
        std::vector<double> centers;
    };

    struct Initial {
        enum class Type { gaussian, cat };
        Type type = Type::gaussian;
        std::vector<double> centers{0.0};
        std::vector<double> widths{1.0};
        std::vector<double> momenta;  // defaults to zeros
        std::vector<Branch> branches;
    } initial;

    struct Dynamics {
        enum class Kind { zero, free, harmonic, double_well };
        Kind hamiltonian = Kind::free;
        double omega = 1.0;
        double well_a = 1.0;
        double well_b = 1.0;
        enum class Pair { none, gaussian_well };
        Pair pair = Pair::none;
        double pair_depth = 1.0;
        double pair_width = 1.0;
        double dt = 1e-3;
        double duration = 1.0;
        double dt_max = 0.1;
    } dynamics;

    struct Process {
        enum class Type { unitary, grw, csl, bohm };
        Type type = Type::unitary;
        double lambda = 0.5;
        double alpha = 4.0;
        enum class Kernel { gaussian, compact };
        Kernel kernel = Kernel::gaussian;
        double kernel_half_width = 1.0;
        std::uint64_t event_cap = 1'000'000;
        double gamma = 1.0;
        double smearing_alpha = 4.0;
        int smearing_stride = 4;
        double dt_sde = 1e-4;
        std::vector<double> bohm_q0;  // empty: equilibrium-sampled starts
    } process;

    struct Analysis {
        std::vector<std::pair<double, double>> regions;
        std::optional<std::pair<double, double>> probes;
        double snapshot_cadence = 0.0;  // 0 disables snapshots
    } analysis;

    struct Run {
        int replicas = 1;
        std::uint64_t seed = 1;
        std::string output_dir = "out";
        int threads = 0;  // 0: machine parallelism (capped by COLLAPSE_LAB_THREADS)
    } run;

    friend bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);
};

inline bool operator==(const ScenarioConfig::Branch& a, const ScenarioConfig::Branch& b) {
    return a.coeff == b.coeff && a.centers == b.centers;
}

inline bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    return a.grid.particles == b.grid.particles && a.grid.points == b.grid.points &&
           a.grid.length == b.grid.length && a.grid.masses == b.grid.masses &&
           a.grid.max_cells == b.grid.max_cells && a.initial.type == b.initial.type &&
           a.initial.centers == b.initial.centers && a.initial.widths == b.initial.widths &&
           a.initial.momenta == b.initial.momenta && a.initial.branches == b.initial.branches &&
           a.dynamics.hamiltonian == b.dynamics.hamiltonian && a.dynamics.omega == b.dynamics.omega &&
           a.dynamics.well_a == b.dynamics.well_a && a.dynamics.well_b == b.dynamics.well_b &&
           a.dynamics.pair == b.dynamics.pair && a.dynamics.pair_depth == b.dynamics.pair_depth &&
           a.dynamics.pair_width == b.dynamics.pair_width && a.dynamics.dt == b.dynamics.dt &&
           a.dynamics.duration == b.dynamics.duration && a.dynamics.dt_max == b.dynamics.dt_max &&
           a.process.type == b.process.type && a.process.lambda == b.process.lambda &&
           a.process.alpha == b.process.alpha && a.process.kernel == b.process.kernel &&
           a.process.kernel_half_width == b.process.kernel_half_width &&
           a.process.event_cap == b.process.event_cap && a.process.gamma == b.process.gamma &&
           a.process.smearing_alpha == b.process.smearing_alpha &&
           a.process.smearing_stride == b.process.smearing_stride &&
           a.process.dt_sde == b.process.dt_sde && a.process.bohm_q0 == b.process.bohm_q0 &&
           a.analysis.regions == b.analysis.regions && a.analysis.probes == b.analysis.probes &&
           a.analysis.snapshot_cadence == b.analysis.snapshot_cadence &&
           a.run.replicas == b.run.replicas && a.run.seed == b.run.seed &&
           a.run.output_dir == b.run.output_dir && a.run.threads == b.run.threads;
}

// One parse or validation problem, anchored to a source line when known.
struct ConfigError {
    int line = 0;  // 0: not tied to a specific line
    std::string message;

    std::string to_string() const {
        if (line > 0) return "line " + std::to_string(line) + ": " + message;
        return message;
    }
};

struct ParseResult {
    std::optional<ScenarioConfig> config;
    std::vector<ConfigError> errors;

    bool ok() const { return config.has_value() && errors.empty(); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

// Raw key/value with its source line, grouped per section.
struct RawConfig {
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::map<std::string, std::map<std::string, Entry>> sections;
    std::map<std::string, int> section_lines;
};

inline bool parse_double(const std::string& text, double& out) {
    std::istringstream in(text);
    in >> out;
    return static_cast<bool>(in) && in.eof() && std::isfinite(out);
}

inline bool parse_double_list(const std::string& text, std::vector<double>& out) {
    out.clear();
    std::istringstream in(text);
    double v;
    while (in >> v) {
        if (!std::isfinite(v)) return false;
        out.push_back(v);
    }
    return in.eof() && !out.empty();
}

inline bool parse_int(const std::string& text, long long& out) {
    std::istringstream in(text);
    in >> out;
    return static_cast<bool>(in) && in.eof();
}

inline bool parse_uint(const std::string& text, std::uint64_t& out) {
    if (text.empty() || text[0] == '-') return false;
    std::istringstream in(text);
    in >> out;
    return static_cast<bool>(in) && in.eof();
}

// "a:b, c:d" interval list.
inline bool parse_intervals(const std::string& text, std::vector<std::pair<double, double>>& out) {
    out.clear();
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos) return false;
        double a, b;
        if (!parse_double(trim(item.substr(0, colon)), a)) return false;
        if (!parse_double(trim(item.substr(colon + 1)), b)) return false;
        out.emplace_back(a, b);
    }
    return !out.empty();
}

}  // namespace detail

// Builds the GridSpec / initial state / Hamiltonian / process parameter
// objects from a validated config. These can still throw on constraint
// violations; validate_config routes such failures to error lists first.
inline GridSpec make_grid(const ScenarioConfig& config) {
    return GridSpec(config.grid.particles, config.grid.points, config.grid.length,
                    config.grid.masses, config.grid.max_cells);
}

inline WaveFunction make_initial_state(const ScenarioConfig& config, const GridSpec& grid) {
    const auto n = static_cast<std::size_t>(grid.num_particles);
    std::vector<double> momenta = config.initial.momenta;
    if (momenta.empty()) momenta.assign(n, 0.0);
    if (config.initial.type == ScenarioConfig::Initial::Type::gaussian)
        return gaussian_packet(grid, config.initial.centers, config.initial.widths, momenta);
    std::vector<std::pair<Complex, WaveFunction>> branches;
    branches.reserve(config.initial.branches.size());
    for (const auto& branch : config.initial.branches)
        branches.emplace_back(Complex{branch.coeff, 0.0},
                              gaussian_packet(grid, branch.centers, config.initial.widths, momenta));
    return superpose(branches);
}

inline HamiltonianSpec make_hamiltonian(const ScenarioConfig& config) {
    HamiltonianSpec ham;
    ham.dt_max = config.dynamics.dt_max;
    using Kind = ScenarioConfig::Dynamics::Kind;
    switch (config.dynamics.hamiltonian) {
        case Kind::zero:
            ham.kinetic = false;
            break;
        case Kind::free:
            break;
        case Kind::harmonic:
            ham.external.push_back(
                {ExternalPotential::Kind::harmonic, config.dynamics.omega, 1.0, 1.0});
            break;
        case Kind::double_well:
            ham.external.push_back({ExternalPotential::Kind::double_well, 1.0,
                                    config.dynamics.well_a, config.dynamics.well_b});
            break;
    }
    if (config.dynamics.pair == ScenarioConfig::Dynamics::Pair::gaussian_well)
        ham.pair = {PairPotential::Kind::gaussian_well, config.dynamics.pair_depth,
                    config.dynamics.pair_width};
    return ham;
}

inline GrwParams make_grw_params(const ScenarioConfig& config) {
    GrwParams params;
    params.lambda_rate = config.process.lambda;
    params.alpha = config.process.alpha;
    params.kernel = config.process.kernel == ScenarioConfig::Process::Kernel::gaussian
                        ? CollapseKernel::gaussian
                        : CollapseKernel::compact_support;
    params.compact_half_width = config.process.kernel_half_width;
    return params;
}

inline CslParams make_csl_params(const ScenarioConfig& config) {
    CslParams params;
    params.gamma = config.process.gamma;
    params.smearing_alpha = config.process.smearing_alpha;
    params.smearing_stride = config.process.smearing_stride;
    params.dt_sde = config.process.dt_sde;
    return params;
}

// Checks every module precondition reachable from the config, reporting each
// violation with the source line captured at parse time.
inline std::vector<ConfigError> validate_config(
    const ScenarioConfig& config, const std::map<std::string, int>& key_lines = {}) {
    std::vector<ConfigError> errors;
    auto line_of = [&key_lines](const std::string& key) {
        const auto it = key_lines.find(key);
        return it == key_lines.end() ? 0 : it->second;
    };
    auto fail = [&](const std::string& key, const std::string& message) {
        errors.push_back({line_of(key), message});
    };

    const auto n = static_cast<std::size_t>(config.grid.particles);
    if (config.grid.particles < 1) fail("grid.particles", "particles must satisfy N >= 1");
    if (config.grid.points < 2 || (config.grid.points & (config.grid.points - 1)) != 0)
        fail("grid.points", "points must be a power of two >= 2");
    if (!(config.grid.length > 0.0)) fail("grid.length", "length must satisfy L > 0");
    if (config.grid.masses.size() != 1 && config.grid.masses.size() != n)
        fail("grid.masses", "masses must list one value, or one per particle");
    for (double mass : config.grid.masses)
        if (!(mass > 0.0)) fail("grid.masses", "masses must be strictly positive");
    if (config.grid.particles >= 1 && config.grid.points >= 2) {
        long double cells = 1.0L;
        for (int p = 0; p < config.grid.particles; ++p) cells *= config.grid.points;
        if (cells > static_cast<long double>(config.grid.max_cells))
            fail("grid.points", "grid cells M^N exceed the configured cap (max_cells)");
    }

    const double spacing = config.grid.length / config.grid.points;
    auto check_packet = [&](const std::string& key_prefix, const std::vector<double>& centers) {
        if (centers.size() != n)
            fail(key_prefix, "need one center per particle");
        for (double c : centers)
            if (!(std::abs(c) < 0.5 * config.grid.length))
                fail(key_prefix, "packet center must lie inside the box (-L/2, L/2)");
    };
    if (config.initial.widths.size() != n)
        fail("initial.widths", "need one width per particle");
    for (double width : config.initial.widths)
        if (!(width >= 2.0 * spacing))
            fail("initial.widths", "packet width must be at least two grid spacings");
    if (!config.initial.momenta.empty() && config.initial.momenta.size() != n)
        fail("initial.momenta", "need one momentum per particle (or omit the key)");
    if (config.initial.type == ScenarioConfig::Initial::Type::gaussian) {
        check_packet("initial.centers", config.initial.centers);
    } else {
        if (config.initial.branches.size() < 2)
            fail("initial.type", "cat states need at least two branch centers");
        double coeff_mass = 0.0;
        for (std::size_t br = 0; br < config.initial.branches.size(); ++br) {
            check_packet("initial.branch" + std::to_string(br + 1) + "_centers",
                         config.initial.branches[br].centers);
            coeff_mass += config.initial.branches[br].coeff * config.initial.branches[br].coeff;
        }
        if (!(coeff_mass > 0.0))
            fail("initial.branch_coeffs", "branch coefficients must not all vanish");
    }

    if (!(config.dynamics.dt > 0.0)) fail("dynamics.dt", "dt must be positive");
    if (!(config.dynamics.dt_max > 0.0)) fail("dynamics.dt_max", "dt_max must be positive");
    if (config.dynamics.dt > config.dynamics.dt_max)
        fail("dynamics.dt", "dt must satisfy dt <= dt_max");
    if (!(config.dynamics.duration >= 0.0)) fail("dynamics.T", "T must satisfy T >= 0");
    if (config.dynamics.hamiltonian == ScenarioConfig::Dynamics::Kind::harmonic &&
        !(config.dynamics.omega > 0.0))
        fail("dynamics.omega", "omega must be positive");
    if (config.dynamics.pair == ScenarioConfig::Dynamics::Pair::gaussian_well &&
        !(config.dynamics.pair_width > 0.0))
        fail("dynamics.pair_width", "pair width must be positive");

    using ProcessType = ScenarioConfig::Process::Type;
    if (config.process.type == ProcessType::grw) {
        if (!(config.process.lambda > 0.0))
            fail("process.lambda", "collapse rate must satisfy lambda > 0");
        if (!(config.process.alpha > 0.0)) fail("process.alpha", "kernel alpha must satisfy alpha > 0");
        if (config.process.kernel == ScenarioConfig::Process::Kernel::compact) {
            const double w = config.process.kernel_half_width;
            if (!(w >= 2.0 * spacing && w <= config.grid.length / 4.0))
                fail("process.kernel_half_width",
                     "compact kernel half-width must lie in [2 spacing, L/4]");
        }
        if (config.process.event_cap < 1) fail("process.event_cap", "event cap must be positive");
    }
    if (config.process.type == ProcessType::csl) {
        if (config.grid.particles != 1)
            fail("process.type", "the CSL process is implemented for one particle");
        if (config.process.gamma < 0.0) fail("process.gamma", "gamma must satisfy gamma >= 0");
        if (!(config.process.dt_sde > 0.0)) fail("process.dt_sde", "dt_sde must be positive");
        if (config.process.gamma > 0.0 && config.process.dt_sde > 1e-3 / config.process.gamma)
            fail("process.dt_sde", "dt_sde must satisfy dt_sde <= 1e-3 / gamma");
        if (config.process.smearing_stride < 1 ||
            config.process.smearing_stride >= config.grid.points)
            fail("process.smearing_stride", "smearing stride out of range");
        if (!(config.process.smearing_alpha > 0.0))
            fail("process.smearing_alpha", "smearing alpha must be positive");
    }
    if (config.process.type == ProcessType::bohm) {
        if (!config.process.bohm_q0.empty() && config.process.bohm_q0.size() != n)
            fail("process.bohm_q0", "need one start coordinate per particle");
        for (double q : config.process.bohm_q0)
            if (!(std::abs(q) < 0.5 * config.grid.length))
                fail("process.bohm_q0", "start position must lie inside the box");
    }

    for (const auto& [a, b] : config.analysis.regions) {
        if (!(a < b)) fail("analysis.regions", "region interval is empty or inverted");
        if (!(a >= -0.5 * config.grid.length && b <= 0.5 * config.grid.length))
            fail("analysis.regions", "region interval must lie within the box");
    }
    {
        auto sorted_regions = config.analysis.regions;
        std::sort(sorted_regions.begin(), sorted_regions.end());
        for (std::size_t i = 1; i < sorted_regions.size(); ++i)
            if (sorted_regions[i].first <= sorted_regions[i - 1].second)
                fail("analysis.regions", "region intervals must be disjoint");
    }
    if (config.analysis.probes.has_value()) {
        const auto [l, r] = *config.analysis.probes;
        if (!(std::abs(l) < 0.5 * config.grid.length && std::abs(r) < 0.5 * config.grid.length))
            fail("analysis.probes", "probes must lie inside the box");
    }
    if (!(config.analysis.snapshot_cadence >= 0.0))
        fail("analysis.snapshot_cadence", "snapshot cadence must be >= 0");

    if (config.run.replicas < 1) fail("run.replicas", "replicas must satisfy replicas >= 1");
    if (config.run.threads < 0) fail("run.threads", "threads must be >= 0");
    if (config.run.output_dir.empty()) fail("run.output_dir", "output_dir must not be empty");
    return errors;
}

namespace detail {

// Grammar pass: sections, key = value, comments (# or ;). Total: collects
// errors instead of throwing.
inline RawConfig tokenize_config(const std::string& text, std::vector<ConfigError>& errors) {
    RawConfig raw;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = line;
        const std::size_t comment = stripped.find_first_of("#;");
        if (comment != std::string::npos) stripped = stripped.substr(0, comment);
        stripped = trim(stripped);
        if (stripped.empty()) continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']') {
                errors.push_back({line_no, "unterminated section header"});
                continue;
            }
            section = trim(stripped.substr(1, stripped.size() - 2));
            if (section.empty()) errors.push_back({line_no, "empty section name"});
            raw.section_lines.emplace(section, line_no);
            raw.sections[section];
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            errors.push_back({line_no, "expected 'key = value'"});
            continue;
        }
        if (section.empty()) {
            errors.push_back({line_no, "key outside any [section]"});
            continue;
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            errors.push_back({line_no, "empty key"});
            continue;
        }
        auto& entries = raw.sections[section];
        if (entries.count(key) != 0)
            errors.push_back({line_no, "duplicate key '" + key + "' in [" + section + "]"});
        entries[key] = {value, line_no};
    }
    return raw;
}

}  // namespace detail

// Parses and fully validates scenario text. Total: malformed input yields an
// error list with line numbers, never an exception.
inline ParseResult parse_config(const std::string& text) {
    ParseResult result;
    std::vector<ConfigError>& errors = result.errors;
    const detail::RawConfig raw = detail::tokenize_config(text, errors);
    ScenarioConfig config;
    std::map<std::string, int> key_lines;

    static const std::map<std::string, std::vector<std::string>> kKnownKeys = {
        {"grid", {"particles", "points", "length", "masses", "max_cells"}},
        {"initial",
         {"type", "centers", "widths", "momenta", "branch_coeffs", "branch1_centers",
          "branch2_centers", "branch3_centers", "branch4_centers"}},
        {"dynamics",
         {"hamiltonian", "omega", "well_a", "well_b", "pair", "pair_depth", "pair_width", "dt",
          "T", "dt_max"}},
        {"process",
         {"type", "lambda", "alpha", "kernel", "kernel_half_width", "event_cap", "gamma",
          "smearing_alpha", "smearing_stride", "dt_sde", "bohm_q0"}},
        {"analysis", {"regions", "probes", "snapshot_cadence"}},
        {"run", {"replicas", "seed", "output_dir", "threads"}},
    };

    for (const auto& [section, entries] : raw.sections) {
        const auto known = kKnownKeys.find(section);
        if (known == kKnownKeys.end()) {
            errors.push_back({raw.section_lines.at(section), "unknown section [" + section + "]"});
            continue;
        }
        for (const auto& [key, entry] : entries) {
            bool recognized = false;
            for (const std::string& candidate : known->second)
                if (candidate == key) recognized = true;
            if (!recognized)
                errors.push_back(
                    {entry.line, "unknown key '" + key + "' in section [" + section + "]"});
            key_lines[section + "." + key] = entry.line;
        }
    }

    auto entry = [&raw](const std::string& section, const std::string& key)
        -> const detail::RawConfig::Entry* {
        const auto s = raw.sections.find(section);
        if (s == raw.sections.end()) return nullptr;
        const auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    };
    auto bad_value = [&errors](const detail::RawConfig::Entry& e, const std::string& what) {
        errors.push_back({e.line, what + ", got '" + e.value + "'"});
    };
    auto read_double = [&](const std::string& sec, const std::string& key, double& out) {
        if (const auto* e = entry(sec, key)) {
            if (!detail::parse_double(e->value, out)) bad_value(*e, "expected a number");
        }
    };
    auto read_double_list = [&](const std::string& sec, const std::string& key,
                                std::vector<double>& out) {
        if (const auto* e = entry(sec, key)) {
            if (!detail::parse_double_list(e->value, out))
                bad_value(*e, "expected a space-separated list of numbers");
        }
    };
    auto read_int = [&](const std::string& sec, const std::string& key, int& out) {
        if (const auto* e = entry(sec, key)) {
            long long v = 0;
            if (!detail::parse_int(e->value, v))
                bad_value(*e, "expected an integer");
            else
                out = static_cast<int>(v);
        }
    };
    auto read_uint = [&](const std::string& sec, const std::string& key, std::uint64_t& out) {
        if (const auto* e = entry(sec, key)) {
            if (!detail::parse_uint(e->value, out)) bad_value(*e, "expected a non-negative integer");
        }
    };

    read_int("grid", "particles", config.grid.particles);
    read_int("grid", "points", config.grid.points);
    read_double("grid", "length", config.grid.length);
    read_double_list("grid", "masses", config.grid.masses);
    read_uint("grid", "max_cells", config.grid.max_cells);

    if (const auto* e = entry("initial", "type")) {
        if (e->value == "gaussian")
            config.initial.type = ScenarioConfig::Initial::Type::gaussian;
        else if (e->value == "cat")
            config.initial.type = ScenarioConfig::Initial::Type::cat;
        else
            bad_value(*e, "expected 'gaussian' or 'cat'");
    }
    read_double_list("initial", "centers", config.initial.centers);
    read_double_list("initial", "widths", config.initial.widths);
    read_double_list("initial", "momenta", config.initial.momenta);
    if (config.initial.type == ScenarioConfig::Initial::Type::cat) {
        std::vector<double> coeffs;
        read_double_list("initial", "branch_coeffs", coeffs);
        for (int br = 1; br <= 4; ++br) {
            const auto* e = entry("initial", "branch" + std::to_string(br) + "_centers");
            if (e == nullptr) continue;
            ScenarioConfig::Branch branch;
            if (!detail::parse_double_list(e->value, branch.centers)) {
                bad_value(*e, "expected a space-separated list of numbers");
                continue;
            }
            branch.coeff = static_cast<std::size_t>(br - 1) < coeffs.size()
                               ? coeffs[static_cast<std::size_t>(br - 1)]
                               : 1.0;
            config.initial.branches.push_back(std::move(branch));
        }
    } else if (entry("initial", "branch_coeffs") || entry("initial", "branch1_centers")) {
        const auto* e = entry("initial", "branch_coeffs");
        if (e == nullptr) e = entry("initial", "branch1_centers");
        errors.push_back({e->line, "branch keys require initial type 'cat'"});
    }

    if (const auto* e = entry("dynamics", "hamiltonian")) {
        using Kind = ScenarioConfig::Dynamics::Kind;
        if (e->value == "zero")
            config.dynamics.hamiltonian = Kind::zero;
        else if (e->value == "free")
            config.dynamics.hamiltonian = Kind::free;
        else if (e->value == "harmonic")
            config.dynamics.hamiltonian = Kind::harmonic;
        else if (e->value == "double_well")
            config.dynamics.hamiltonian = Kind::double_well;
        else
            bad_value(*e, "expected one of zero/free/harmonic/double_well");
    }
    read_double("dynamics", "omega", config.dynamics.omega);
    read_double("dynamics", "well_a", config.dynamics.well_a);
    read_double("dynamics", "well_b", config.dynamics.well_b);
    if (const auto* e = entry("dynamics", "pair")) {
        if (e->value == "none")
            config.dynamics.pair = ScenarioConfig::Dynamics::Pair::none;
        else if (e->value == "gaussian_well")
            config.dynamics.pair = ScenarioConfig::Dynamics::Pair::gaussian_well;
        else
            bad_value(*e, "expected 'none' or 'gaussian_well'");
    }
    read_double("dynamics", "pair_depth", config.dynamics.pair_depth);
    read_double("dynamics", "pair_width", config.dynamics.pair_width);
    read_double("dynamics", "dt", config.dynamics.dt);
    read_double("dynamics", "T", config.dynamics.duration);
    read_double("dynamics", "dt_max", config.dynamics.dt_max);

    if (const auto* e = entry("process", "type")) {
        using ProcessType = ScenarioConfig::Process::Type;
        if (e->value == "unitary")
            config.process.type = ProcessType::unitary;
        else if (e->value == "grw")
            config.process.type = ProcessType::grw;
        else if (e->value == "csl")
            config.process.type = ProcessType::csl;
        else if (e->value == "bohm")
            config.process.type = ProcessType::bohm;
        else
            bad_value(*e, "expected one of unitary/grw/csl/bohm");
    }
    read_double("process", "lambda", config.process.lambda);
    read_double("process", "alpha", config.process.alpha);
    if (const auto* e = entry("process", "kernel")) {
        if (e->value == "gaussian")
            config.process.kernel = ScenarioConfig::Process::Kernel::gaussian;
        else if (e->value == "compact")
            config.process.kernel = ScenarioConfig::Process::Kernel::compact;
        else
            bad_value(*e, "expected 'gaussian' or 'compact'");
    }
    read_double("process", "kernel_half_width", config.process.kernel_half_width);
    read_uint("process", "event_cap", config.process.event_cap);
    read_double("process", "gamma", config.process.gamma);
    read_double("process", "smearing_alpha", config.process.smearing_alpha);
    read_int("process", "smearing_stride", config.process.smearing_stride);
    read_double("process", "dt_sde", config.process.dt_sde);
    read_double_list("process", "bohm_q0", config.process.bohm_q0);

    if (const auto* e = entry("analysis", "regions")) {
        if (!detail::parse_intervals(e->value, config.analysis.regions))
            bad_value(*e, "expected intervals 'a:b, c:d'");
    }
    if (const auto* e = entry("analysis", "probes")) {
        std::vector<double> probes;
        if (!detail::parse_double_list(e->value, probes) || probes.size() != 2)
            bad_value(*e, "expected two probe coordinates");
        else
            config.analysis.probes = std::make_pair(probes[0], probes[1]);
    }
    read_double("analysis", "snapshot_cadence", config.analysis.snapshot_cadence);

    read_int("run", "replicas", config.run.replicas);
    read_uint("run", "seed", config.run.seed);
    if (const auto* e = entry("run", "output_dir")) config.run.output_dir = e->value;
    read_int("run", "threads", config.run.threads);

    if (errors.empty()) {
        std::vector<ConfigError> constraint_errors = validate_config(config, key_lines);
        errors.insert(errors.end(), constraint_errors.begin(), constraint_errors.end());
    }
    if (errors.empty()) result.config = std::move(config);
    return result;
}

// Canonical text form; parse(serialize(parse(text))) reproduces the config.
inline std::string serialize_config(const ScenarioConfig& config) {
    std::ostringstream out;
    auto list = [](const std::vector<double>& values) {
        std::string s;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i > 0) s += ' ';
            s += format_double(values[i]);
        }
        return s;
    };
    out << "[grid]\n";
    out << "particles = " << config.grid.particles << "\n";
    out << "points = " << config.grid.points << "\n";
    out << "length = " << format_double(config.grid.length) << "\n";
    out << "masses = " << list(config.grid.masses) << "\n";
    out << "max_cells = " << config.grid.max_cells << "\n";
    out << "\n[initial]\n";
    out << "type = "
        << (config.initial.type == ScenarioConfig::Initial::Type::gaussian ? "gaussian" : "cat")
        << "\n";
    out << "centers = " << list(config.initial.centers) << "\n";
    out << "widths = " << list(config.initial.widths) << "\n";
    if (!config.initial.momenta.empty()) out << "momenta = " << list(config.initial.momenta) << "\n";
    if (config.initial.type == ScenarioConfig::Initial::Type::cat) {
        std::vector<double> coeffs;
        for (const auto& branch : config.initial.branches) coeffs.push_back(branch.coeff);
        out << "branch_coeffs = " << list(coeffs) << "\n";
        for (std::size_t br = 0; br < config.initial.branches.size(); ++br)
            out << "branch" << br + 1 << "_centers = " << list(config.initial.branches[br].centers)
                << "\n";
    }
    out << "\n[dynamics]\n";
    using Kind = ScenarioConfig::Dynamics::Kind;
    const char* ham = "free";
    if (config.dynamics.hamiltonian == Kind::zero) ham = "zero";
    if (config.dynamics.hamiltonian == Kind::harmonic) ham = "harmonic";
    if (config.dynamics.hamiltonian == Kind::double_well) ham = "double_well";
    out << "hamiltonian = " << ham << "\n";
    if (config.dynamics.hamiltonian == Kind::harmonic)
        out << "omega = " << format_double(config.dynamics.omega) << "\n";
    if (config.dynamics.hamiltonian == Kind::double_well) {
        out << "well_a = " << format_double(config.dynamics.well_a) << "\n";
        out << "well_b = " << format_double(config.dynamics.well_b) << "\n";
    }
    if (config.dynamics.pair == ScenarioConfig::Dynamics::Pair::gaussian_well) {
        out << "pair = gaussian_well\n";
        out << "pair_depth = " << format_double(config.dynamics.pair_depth) << "\n";
        out << "pair_width = " << format_double(config.dynamics.pair_width) << "\n";
    }
    out << "dt = " << format_double(config.dynamics.dt) << "\n";
    out << "T = " << format_double(config.dynamics.duration) << "\n";
    out << "dt_max = " << format_double(config.dynamics.dt_max) << "\n";
    out << "\n[process]\n";
    using ProcessType = ScenarioConfig::Process::Type;
    const char* process = "unitary";
    if (config.process.type == ProcessType::grw) process = "grw";
    if (config.process.type == ProcessType::csl) process = "csl";
    if (config.process.type == ProcessType::bohm) process = "bohm";
    out << "type = " << process << "\n";
    if (config.process.type == ProcessType::grw) {
        out << "lambda = " << format_double(config.process.lambda) << "\n";
        out << "alpha = " << format_double(config.process.alpha) << "\n";
        out << "kernel = "
            << (config.process.kernel == ScenarioConfig::Process::Kernel::gaussian ? "gaussian"
                                                                                   : "compact")
            << "\n";
        if (config.process.kernel == ScenarioConfig::Process::Kernel::compact)
            out << "kernel_half_width = " << format_double(config.process.kernel_half_width)
                << "\n";
        out << "event_cap = " << config.process.event_cap << "\n";
    }
    if (config.process.type == ProcessType::csl) {
        out << "gamma = " << format_double(config.process.gamma) << "\n";
        out << "smearing_alpha = " << format_double(config.process.smearing_alpha) << "\n";
        out << "smearing_stride = " << config.process.smearing_stride << "\n";
        out << "dt_sde = " << format_double(config.process.dt_sde) << "\n";
    }
    if (config.process.type == ProcessType::bohm && !config.process.bohm_q0.empty())
        out << "bohm_q0 = " << list(config.process.bohm_q0) << "\n";
    out << "\n[analysis]\n";
    if (!config.analysis.regions.empty()) {
        out << "regions = ";
        for (std::size_t i = 0; i < config.analysis.regions.size(); ++i) {
            if (i > 0) out << ", ";
            out << format_double(config.analysis.regions[i].first) << ":"
                << format_double(config.analysis.regions[i].second);
        }
        out << "\n";
    }
    if (config.analysis.probes.has_value())
        out << "probes = " << format_double(config.analysis.probes->first) << " "
            << format_double(config.analysis.probes->second) << "\n";
    out << "snapshot_cadence = " << format_double(config.analysis.snapshot_cadence) << "\n";
    out << "\n[run]\n";
    out << "replicas = " << config.run.replicas << "\n";
    out << "seed = " << config.run.seed << "\n";
    out << "output_dir = " << config.run.output_dir << "\n";
    out << "threads = " << config.run.threads << "\n";
    return out.str();
}

}  // namespace collapse_lab
