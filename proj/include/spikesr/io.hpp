#ifndef SPIKESR_IO_HPP
#define SPIKESR_IO_HPP

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spikesr/error.hpp"
#include "spikesr/pipeline.hpp"
#include "spikesr/signal_model.hpp"

#ifndef SPIKESR_GIT_DESCRIBE
#define SPIKESR_GIT_DESCRIBE "unknown"
#endif

namespace spikesr::io
{

using nlohmann::json;

inline constexpr int schema_version = 1;

/// Shortest-safe decimal form with 17 significant digits.
inline std::string fmt(double v)
{
    if (std::isnan(v))
    {
        return "nan";
    }
    if (std::isinf(v))
    {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline NoiseKind noise_from_string(const std::string& s)
{
    if (s == "none")
    {
        return NoiseKind::none;
    }
    if (s == "cauchy_clipped")
    {
        return NoiseKind::cauchy_clipped;
    }
    if (s == "uniform_box")
    {
        return NoiseKind::uniform_box;
    }
    throw Error(Errc::config_error, "field 'noise': unknown kind '" + s + "'");
}

inline std::string to_string(NoiseKind k)
{
    switch (k)
    {
    case NoiseKind::none: return "none";
    case NoiseKind::cauchy_clipped: return "cauchy_clipped";
    case NoiseKind::uniform_box: return "uniform_box";
    }
    return "none";
}

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const json& j, const std::string& field)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    {
        throw Error(Errc::config_error, "field '" + field + "': expected [re, im]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

namespace detail
{

inline std::string line_of(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i)
    {
        if (text[i] == '\n')
        {
            ++line;
            col = 1;
        }
        else
        {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <typename T>
T get(const json& j, const char* field, const T& fallback)
{
    if (!j.contains(field))
    {
        return fallback;
    }
    try
    {
        return j.at(field).get<T>();
    }
    catch (const json::exception&)
    {
        throw Error(Errc::config_error, std::string("field '") + field + "': wrong type");
    }
}

} // namespace detail

inline const std::set<std::string>& known_fields()
{
    static const std::set<std::string> fields{
        "schema", "M",      "sizes",  "delta",      "srf",        "nu",     "eta",
        "nodes",  "amps",   "omega",  "epsilon",    "noise",      "seed",   "trials",
        "srf_grid", "omega_grid", "methods", "stride", "n_rho", "bins_per_inv_delta",
        "threads", "method", "comment"};
    return fields;
}

/// Parse and validate a configuration document.
inline json parse_config_text(const std::string& text)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::parse_error& e)
    {
        throw Error(Errc::config_error, detail::line_of(text, e.byte) + ": " + e.what());
    }
    if (!j.is_object())
    {
        throw Error(Errc::config_error, "top level must be an object");
    }
    if (!j.contains("schema") || !j["schema"].is_number_integer() || j["schema"].get<int>() != schema_version)
    {
        throw Error(Errc::config_error, "field 'schema': expected 1");
    }
    for (const auto& [key, _] : j.items())
    {
        if (!known_fields().count(key))
        {
            throw Error(Errc::config_error, "field '" + key + "': unknown");
        }
    }
    return j;
}

inline json load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw Error(Errc::config_error, "cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline ExperimentSpec spec_from_json(const json& j)
{
    ExperimentSpec s;
    auto& g   = s.geometry;
    s.omega   = detail::get<double>(j, "omega", s.omega);
    s.epsilon = detail::get<double>(j, "epsilon", s.epsilon);
    s.noise   = noise_from_string(detail::get<std::string>(j, "noise", s.epsilon > 0 ? "cauchy_clipped" : "none"));
    s.seed    = detail::get<std::uint64_t>(j, "seed", 0);
    s.trials  = detail::get<std::size_t>(j, "trials", 1);
    s.stride  = detail::get<std::size_t>(j, "stride", 1);
    s.n_rho   = detail::get<std::size_t>(j, "n_rho", s.n_rho);
    s.threads = detail::get<std::size_t>(j, "threads", 0);
    s.bins_per_inv_delta = detail::get<double>(j, "bins_per_inv_delta", s.bins_per_inv_delta);
    s.srf_grid   = detail::get<std::vector<double>>(j, "srf_grid", {});
    s.omega_grid = detail::get<std::vector<double>>(j, "omega_grid", {});
    if (!(s.omega > 0.0))
    {
        throw Error(Errc::config_error, "field 'omega': must be > 0");
    }
    if (s.epsilon < 0.0)
    {
        throw Error(Errc::config_error, "field 'epsilon': must be >= 0");
    }
    if (s.trials == 0)
    {
        throw Error(Errc::config_error, "field 'trials': must be >= 1");
    }
    for (double v : s.srf_grid)
    {
        if (!(v > 0.0))
        {
            throw Error(Errc::config_error, "field 'srf_grid': values must be > 0");
        }
    }
    if (j.contains("methods"))
    {
        s.methods.clear();
        for (const auto& m : detail::get<std::vector<std::string>>(j, "methods", {}))
        {
            s.methods.push_back(method_from_string(m));
        }
    }

    g.M     = detail::get<std::size_t>(j, "M", 1);
    g.sizes = detail::get<std::vector<std::size_t>>(j, "sizes", {1});
    g.nu    = detail::get<std::vector<double>>(j, "nu", {});
    g.eta   = detail::get<double>(j, "eta", 1.0);
    if (g.nu.empty())
    {
        for (auto n : g.sizes)
        {
            g.nu.push_back(std::max<double>(1.0, static_cast<double>(n)));
        }
    }
    if (j.contains("delta") && j.contains("srf"))
    {
        throw Error(Errc::config_error, "fields 'delta' and 'srf': give one, not both");
    }
    if (j.contains("srf"))
    {
        const double r = detail::get<double>(j, "srf", 1.0);
        if (!(r > 0.0))
        {
            throw Error(Errc::config_error, "field 'srf': must be > 0");
        }
        g.delta = 1.0 / (r * s.omega);
    }
    else
    {
        g.delta = detail::get<double>(j, "delta", g.delta);
    }
    if (j.contains("nodes"))
    {
        g.nodes = detail::get<std::vector<double>>(j, "nodes", {});
    }
    if (j.contains("amps"))
    {
        const auto& a = j["amps"];
        if (!a.is_array())
        {
            throw Error(Errc::config_error, "field 'amps': expected an array of [re, im]");
        }
        std::vector<Complex> amps;
        for (const auto& z : a)
        {
            amps.push_back(complex_from_json(z, "amps"));
        }
        g.amps = std::move(amps);
    }
    return s;
}

inline json spike_to_json(const ClusteredSpike& cs, std::uint64_t seed)
{
    json j;
    j["schema"] = schema_version;
    j["seed"]   = seed;
    j["nodes"]  = cs.spike.nodes();
    json amps   = json::array();
    for (auto a : cs.spike.amps())
    {
        amps.push_back(complex_to_json(a));
    }
    j["amps"]           = amps;
    j["partition"]      = cs.config.partition;
    j["sizes"]          = cs.config.sizes;
    j["multiplicities"] = cs.config.multiplicities;
    j["h"]              = cs.config.h;
    j["nu"]             = cs.config.nu;
    j["eta"]            = cs.config.eta;
    return j;
}

/// RecoveryResult without timing fields (those are opt-in).
inline json result_to_json(const RecoveryResult& r, bool with_timing = false)
{
    json j;
    j["method"]    = std::string(to_string(r.method));
    j["rho"]       = r.plan.rho;
    j["t"]         = r.plan.t;
    j["est_nodes"] = r.est_nodes;
    json amps      = json::array();
    for (auto a : r.est_amps)
    {
        amps.push_back(complex_to_json(a));
    }
    j["est_amps"] = amps;
    if (!r.matching.empty())
    {
        j["matching"]    = r.matching;
        j["node_errors"] = r.node_errors;
        j["amp_errors"]  = r.amp_errors;
    }
    if (!r.k_x.empty())
    {
        j["k_x"] = r.k_x;
        j["k_a"] = r.k_a;
    }
    if (with_timing)
    {
        j["wall_time_ns"] = r.wall_time.count();
    }
    return j;
}

//------------------------------------------------------------------------------
// CSV tables. Data and timing go to separate files.
//------------------------------------------------------------------------------

inline void write_sweep(std::ostream& os, const SweepTable& t)
{
    os << "rho,delta_rho,sigma_M1,scaled_sqrt_sigma\n";
    for (const auto& r : t.rows)
    {
        os << r.rho << ',' << fmt(r.delta_rho) << ',' << fmt(r.sigma) << ',' << fmt(r.scaled_sqrt) << '\n';
    }
}

inline void write_sweep_timing(std::ostream& os, const SweepTable& t)
{
    os << "rho,wall_time_ns\n";
    for (const auto& r : t.rows)
    {
        os << r.rho << ',' << r.wall_time_ns << '\n';
    }
}

inline void write_optimality(std::ostream& os, const OptimalityTable& t)
{
    os << "srf,node,mean_kx,mean_ka,median_kx,median_ka,successes\n";
    for (const auto& r : t.rows)
    {
        os << fmt(r.srf) << ',' << r.node << ',' << fmt(r.mean_kx) << ',' << fmt(r.mean_ka) << ','
           << fmt(r.median_kx) << ',' << fmt(r.median_ka) << ',' << r.successes << '\n';
    }
}

inline void write_slopes(std::ostream& os, const OptimalityTable& t)
{
    os << "node,role,kx_slope,kx_stderr,ka_slope,ka_stderr\n";
    for (const auto& s : t.slopes)
    {
        const char* role = s.node == t.cluster_node ? "cluster" : "reference";
        os << s.node << ',' << role << ',' << fmt(s.kx.slope) << ',' << fmt(s.kx.slope_stderr) << ','
           << fmt(s.ka.slope) << ',' << fmt(s.ka.slope_stderr) << '\n';
    }
}

inline std::string csv_escape(const std::string& s)
{
    std::string out = "\"";
    for (char c : s)
    {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

inline void write_failures(std::ostream& os, const std::vector<TrialFailure>& f)
{
    os << "srf,trial,method,reason\n";
    for (const auto& r : f)
    {
        os << fmt(r.srf) << ',' << r.trial << ',' << r.method << ',' << csv_escape(r.reason) << '\n';
    }
}

inline void write_bench(std::ostream& os, const BenchTable& t)
{
    os << "method,srf,mean_err_x1,median_err_x1,successes\n";
    for (const auto& r : t.rows)
    {
        os << r.method << ',' << fmt(r.srf) << ',' << fmt(r.mean_err_x1) << ',' << fmt(r.median_err_x1) << ','
           << r.successes << '\n';
    }
}

inline void write_bench_timing(std::ostream& os, const BenchTable& t)
{
    os << "method,srf,mean_time_ns,median_time_ns\n";
    for (const auto& r : t.rows)
    {
        os << r.method << ',' << fmt(r.srf) << ',' << fmt(r.mean_time_ns) << ',' << fmt(r.median_time_ns) << '\n';
    }
}

inline void write_complexity_timing(std::ostream& os, const BenchTable& t)
{
    os << "method,omega,median_time_ns\n";
    for (const auto& r : t.complexity)
    {
        os << r.method << ',' << fmt(r.omega) << ',' << fmt(r.median_time_ns) << '\n';
    }
}

inline json manifest(const std::string& command, const json& config, const json& metadata,
                     std::int64_t total_ns)
{
    json j;
    j["schema"]       = schema_version;
    j["command"]      = command;
    j["git_describe"] = SPIKESR_GIT_DESCRIBE;
    j["spec"]         = config;
    j["seeds"]        = {{"base", config.value("seed", std::uint64_t{0})}, {"trial_rule", "seed xor trial"}};
    j["metadata"]     = metadata;
    j["timings"]      = {{"total_ns", total_ns}};
    return j;
}

} // namespace spikesr::io

#endif // SPIKESR_IO_HPP
