#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "coincidence_sim.hpp"
#include "correlation_model.hpp"
#include "error.hpp"
#include "etalon_filter.hpp"
#include "fitter.hpp"
#include "histogram.hpp"
#include "units.hpp"

// Text formats. Histogram and curve tables are comma separated with
// '#'-prefixed "key = value" header lines; the params document is JSON.
// Times are picoseconds, frequencies MHz, durations seconds; the unit is part
// of every key name.
namespace opocomb::io
{

// Shortest representation that reads back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

inline std::string format_fixed(double v, int digits)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
    std::string s(buf, end);
    return s == "-0.0000" ? "0.0000" : s;
}

inline constexpr int time_digits = 4;

namespace detail
{
inline std::string trim(std::string_view s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos)
        return {};
    const auto b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;)
    {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

inline double parse_double(const std::string &s, std::size_t line, const std::string &what)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ParseError("malformed " + what + " '" + s + "'", line);
    return v;
}

inline std::int64_t parse_int(const std::string &s, std::size_t line, const std::string &what)
{
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ParseError("malformed " + what + " '" + s + "'", line);
    return v;
}
} // namespace detail

// "t0:t1,t2:t3" in picoseconds.
inline std::vector<TimeRange> parse_ranges(const std::string &text, std::size_t line = 0)
{
    std::vector<TimeRange> out;
    if (detail::trim(text).empty())
        return out;
    for (const auto &item : detail::split(text, ','))
    {
        const auto ends = detail::split(item, ':');
        if (ends.size() != 2)
            throw ParseError("mask range '" + item + "' is not t0:t1", line);
        TimeRange r{detail::parse_double(ends[0], line, "mask start"), detail::parse_double(ends[1], line, "mask end")};
        if (!(r.lo < r.hi))
            throw ParseError("mask range '" + item + "' needs t0 < t1", line);
        out.push_back(r);
    }
    return out;
}

inline std::string format_ranges(const std::vector<TimeRange> &ranges)
{
    std::string s;
    for (std::size_t i = 0; i < ranges.size(); ++i)
    {
        if (i)
            s += ',';
        s += format_double(ranges[i].lo) + ":" + format_double(ranges[i].hi);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Histogram table

inline constexpr std::string_view histogram_magic = "# opocomb histogram v1";
inline constexpr std::string_view histogram_columns = "bin_index,time_ps,count";

inline void write_histogram(const Histogram &h, std::ostream &os)
{
    validate(h);
    os << histogram_magic << '\n';
    os << "# bin_width_ps = " << format_double(h.bin_width) << '\n';
    os << "# origin_ps = " << format_double(h.origin) << '\n';
    os << "# duration_s = " << format_double(h.acquisition.duration_s) << '\n';
    if (!h.acquisition.label.empty())
        os << "# label = " << h.acquisition.label << '\n';
    if (h.acquisition.seed)
        os << "# seed = " << *h.acquisition.seed << '\n';
    if (!h.masks.empty())
        os << "# mask_ps = " << format_ranges(h.masks) << '\n';
    os << histogram_columns << '\n';
    for (std::size_t i = 0; i < h.size(); ++i)
        os << i << ',' << format_fixed(h.bin_center(i), time_digits) << ',' << h.counts[i] << '\n';
}

namespace detail
{
// Header keys carry their unit as a suffix. A known quantity with a
// different suffix is a unit error rather than an unknown key.
struct HeaderKey
{
    std::string_view name;
    std::string_view unit;
};

inline constexpr HeaderKey histogram_keys[] = {
    {"bin_width", "ps"}, {"origin", "ps"}, {"duration", "s"}, {"mask", "ps"}};

inline void check_header_key(const std::string &key, std::size_t line)
{
    if (key == "label" || key == "seed")
        return;
    for (const auto &k : histogram_keys)
    {
        const std::string base(k.name);
        if (key == base + "_" + std::string(k.unit))
            return;
        if (key.rfind(base + "_", 0) == 0)
            throw UnitError("'" + key + "' must be given in " + std::string(k.unit) + " as '" + base + "_" +
                                std::string(k.unit) + "'",
                            line);
    }
    throw ParseError("unknown header key '" + key + "'", line);
}
} // namespace detail

inline Histogram read_histogram(std::istream &is)
{
    Histogram h;
    h.counts.clear();
    std::optional<double> bin_width, origin;
    std::string line;
    std::size_t ln = 0;
    bool have_magic = false, in_body = false;

    while (std::getline(is, line))
    {
        ++ln;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (detail::trim(line).empty())
            continue;
        if (!in_body && line[0] == '#')
        {
            if (!have_magic)
            {
                if (detail::trim(line) != histogram_magic)
                    throw ParseError("missing '" + std::string(histogram_magic) + "' header", ln);
                have_magic = true;
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError("header line is not 'key = value'", ln);
            const std::string key = detail::trim(std::string_view(line).substr(1, eq - 1));
            const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
            detail::check_header_key(key, ln);
            if (key == "bin_width_ps")
                bin_width = detail::parse_double(value, ln, "bin width");
            else if (key == "origin_ps")
                origin = detail::parse_double(value, ln, "origin");
            else if (key == "duration_s")
                h.acquisition.duration_s = detail::parse_double(value, ln, "duration");
            else if (key == "label")
                h.acquisition.label = value;
            else if (key == "seed")
                h.acquisition.seed = static_cast<std::uint64_t>(detail::parse_int(value, ln, "seed"));
            else if (key == "mask_ps")
            {
                auto r = parse_ranges(value, ln);
                h.masks.insert(h.masks.end(), r.begin(), r.end());
            }
            continue;
        }
        if (!have_magic)
            throw ParseError("missing '" + std::string(histogram_magic) + "' header", ln);
        if (!in_body)
        {
            const auto cols = detail::split(line, ',');
            if (cols.size() == 3 && cols[0] == "bin_index" && cols[2] == "count" && cols[1].rfind("time_", 0) == 0 &&
                cols[1] != "time_ps")
                throw UnitError("time column must be 'time_ps'", ln);
            if (detail::trim(line) != histogram_columns)
                throw ParseError("expected column line '" + std::string(histogram_columns) + "'", ln);
            if (!bin_width || !origin)
                throw ParseError("header must define bin_width_ps and origin_ps", ln);
            if (!(*bin_width > 0.0))
                throw ParseError("bin_width_ps must be positive", ln);
            h.bin_width = *bin_width;
            h.origin = *origin;
            in_body = true;
            continue;
        }

        const auto f = detail::split(line, ',');
        if (f.size() != 3)
            throw ParseError("expected 3 fields, found " + std::to_string(f.size()), ln);
        const auto idx = detail::parse_int(f[0], ln, "bin_index");
        const auto expected = static_cast<std::int64_t>(h.counts.size());
        if (idx < expected)
            throw ParseError("bin_index " + f[0] + " is not strictly increasing", ln);
        if (idx > expected)
            throw ParseError("bin_index " + f[0] + " skips bin " + std::to_string(expected), ln);
        const double t = detail::parse_double(f[1], ln, "time_ps");
        const double want = h.origin + (static_cast<double>(idx) + 0.5) * h.bin_width;
        if (std::abs(t - want) > 0.5e-4 + 1e-12 * std::abs(want))
            throw ParseError("time_ps " + f[1] + " does not match bin centre " + format_fixed(want, time_digits), ln);
        const auto c = detail::parse_int(f[2], ln, "count");
        if (c < 0)
            throw ParseError("negative count " + f[2], ln);
        h.counts.push_back(c);
    }
    if (!in_body)
        throw ParseError("missing column line", ln);
    if (h.counts.empty())
        throw ParseError("histogram has no bins (at least one is required)", ln);
    for (const auto &r : h.masks)
        if (!(r.lo < r.hi))
            throw ParseError("mask range needs lo < hi", ln);
    return h;
}

inline std::string read_text(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::string &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out)
        throw IoError("write failed for '" + path + "'");
}

inline Histogram read_histogram(const std::string &path)
{
    std::istringstream in(read_text(path));
    return read_histogram(in);
}

inline void write_histogram(const Histogram &h, const std::string &path)
{
    std::ostringstream os;
    write_histogram(h, os);
    write_text(path, os.str());
}

// ---------------------------------------------------------------------------
// Curve tables (model evaluations, overlays, residuals)

struct Column
{
    std::string name;
    std::vector<double> values;
    bool integer = false;
};

// Generic table writer: '#' header lines, a column line, then rows.
inline void write_table(std::ostream &os, std::string_view magic, const std::vector<std::pair<std::string, std::string>> &meta,
                        const std::vector<Column> &cols)
{
    os << "# opocomb " << magic << " v1\n";
    for (const auto &[k, v] : meta)
        os << "# " << k << " = " << v << '\n';
    for (std::size_t c = 0; c < cols.size(); ++c)
        os << (c ? "," : "") << cols[c].name;
    os << '\n';
    const std::size_t rows = cols.empty() ? 0 : cols.front().values.size();
    for (std::size_t r = 0; r < rows; ++r)
    {
        for (std::size_t c = 0; c < cols.size(); ++c)
        {
            if (c)
                os << ',';
            const double v = cols[c].values[r];
            if (cols[c].integer)
                os << static_cast<std::int64_t>(v);
            else if (cols[c].name == "time_ps")
                os << format_fixed(v, time_digits);
            else
                os << format_double(v);
        }
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Params document

struct FitSummary
{
    double objective = 0.0;
    double initial_objective = 0.0;
    int iterations = 0;
    bool converged = false;
    Loss loss = Loss::poisson_weighted;
    std::array<double, comb_param_count> stderr_estimates{};
};

struct ParamsDocument
{
    std::optional<CavityParams> cavity;
    std::optional<CombFitParams> comb_fit;
    std::optional<EtalonSpec> etalon;
    std::optional<SimConfig> simulation;
    std::optional<FitSummary> fit_result;
};

inline std::string loss_name(Loss l)
{
    return l == Loss::least_squares ? "least_squares" : "poisson_weighted";
}

inline Loss parse_loss(const std::string &s)
{
    if (s == "least_squares")
        return Loss::least_squares;
    if (s == "poisson_weighted")
        return Loss::poisson_weighted;
    throw InvalidInput("unknown loss '" + s + "' (least_squares or poisson_weighted)");
}

// Keys, in file units, of each CombFitParams field.
inline constexpr std::array<std::string_view, comb_param_count> comb_keys{"c1",     "c2",         "bandwidth_mhz",
                                                                         "tau0_ps", "tau_opo_ps", "tau_d_ps"};

inline std::array<double, comb_param_count> comb_to_file_units(const std::array<double, comb_param_count> &si)
{
    return {si[0], si[1], units::rad_per_s_to_mhz(si[2]), units::s_to_ps(si[3]), units::s_to_ps(si[4]),
            units::s_to_ps(si[5])};
}

inline std::array<double, comb_param_count> comb_from_file_units(const std::array<double, comb_param_count> &f)
{
    return {f[0], f[1], units::mhz_to_rad_per_s(f[2]), units::ps_to_s(f[3]), units::ps_to_s(f[4]),
            units::ps_to_s(f[5])};
}

namespace detail
{
using nlohmann::json;

// Rounds to 15 significant digits so unit conversions do not leave
// representation noise in written files.
inline double tidy(double v)
{
    if (!std::isfinite(v) || v == 0.0)
        return v;
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
    double out = v;
    std::from_chars(buf, end, out);
    return out;
}

inline std::size_t line_of(const std::string &text, std::size_t byte)
{
    std::size_t line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        line += text[i] == '\n';
    return line;
}

inline std::size_t line_of_key(const std::string &text, const std::string &key)
{
    const auto pos = text.find("\"" + key + "\"");
    return pos == std::string::npos ? 0 : line_of(text, pos);
}

// Reads one section, rejecting unknown keys and unit mismatches.
class SectionReader
{
public:
    SectionReader(const json &obj, std::string section, const std::string &text,
                  std::vector<std::pair<std::string, std::string>> known)
        : obj_(obj), section_(std::move(section)), text_(text), known_(std::move(known))
    {
        if (!obj.is_object())
            throw ParseError("section '" + section_ + "' must be an object", line_of_key(text_, section_));
        for (const auto &[key, value] : obj.items())
        {
            const bool exact = std::any_of(known_.begin(), known_.end(), [&](const auto &k) {
                return key == (k.second.empty() ? k.first : k.first + "_" + k.second);
            });
            if (exact)
                continue;
            for (const auto &[base, unit] : known_)
                if (!unit.empty() && key.rfind(base + "_", 0) == 0)
                    throw UnitError(section_ + "." + key + " must be given as '" + base + "_" + unit + "'",
                                    line_of_key(text_, key));
            throw ParseError("unknown key '" + section_ + "." + key + "'", line_of_key(text_, key));
        }
    }

    bool has(const std::string &key) const { return obj_.contains(key); }

    double number(const std::string &key, std::optional<double> fallback = std::nullopt) const
    {
        if (!obj_.contains(key))
        {
            if (fallback)
                return *fallback;
            throw ParseError("missing key '" + section_ + "." + key + "'", line_of_key(text_, section_));
        }
        const auto &v = obj_.at(key);
        if (!v.is_number())
            throw ParseError(section_ + "." + key + " must be a number", line_of_key(text_, key));
        return v.get<double>();
    }

    std::int64_t integer(const std::string &key, std::optional<std::int64_t> fallback = std::nullopt) const
    {
        if (!obj_.contains(key))
        {
            if (fallback)
                return *fallback;
            throw ParseError("missing key '" + section_ + "." + key + "'", line_of_key(text_, section_));
        }
        const auto &v = obj_.at(key);
        if (!v.is_number_integer())
            throw ParseError(section_ + "." + key + " must be an integer", line_of_key(text_, key));
        return v.get<std::int64_t>();
    }

    const json &raw(const std::string &key) const { return obj_.at(key); }

private:
    const json &obj_;
    std::string section_;
    const std::string &text_;
    std::vector<std::pair<std::string, std::string>> known_;
};
} // namespace detail

namespace detail
{
inline void parse_section(ParamsDocument &out, const std::string &name, const nlohmann::json &body,
                          const std::string &text)
{
    if (name == "cavity")
    {
        detail::SectionReader r(body, name, text,
                                {{"gamma1", "mhz"}, {"gamma2", "mhz"}, {"epsilon", ""}, {"bandwidth", "mhz"},
                                 {"fsr", "mhz"}, {"n_modes", ""}, {"finesse_ratio", ""}});
        CavityParams p;
        p.gamma1 = units::mhz_to_rad_per_s(r.number("gamma1_mhz"));
        p.gamma2 = units::mhz_to_rad_per_s(r.number("gamma2_mhz", 0.0));
        p.epsilon = r.number("epsilon");
        p.bandwidth = units::mhz_to_rad_per_s(r.number("bandwidth_mhz"));
        p.fsr = units::mhz_to_rad_per_s(r.number("fsr_mhz"));
        p.n_modes = static_cast<int>(r.integer("n_modes", 200));
        p.finesse_ratio = r.number("finesse_ratio", 1.0);
        validate(p);
        out.cavity = p;
    }
    else if (name == "comb_fit")
    {
        detail::SectionReader r(body, name, text,
                                {{"c1", ""}, {"c2", ""}, {"bandwidth", "mhz"}, {"tau0", "ps"}, {"tau_opo", "ps"},
                                 {"tau_d", "ps"}, {"n_sum", ""}});
        CombFitParams p;
        p.c1 = r.number("c1");
        p.c2 = r.number("c2", 0.0);
        p.bandwidth = units::mhz_to_rad_per_s(r.number("bandwidth_mhz"));
        p.tau0 = units::ps_to_s(r.number("tau0_ps"));
        p.tau_opo = units::ps_to_s(r.number("tau_opo_ps"));
        p.tau_d = units::ps_to_s(r.number("tau_d_ps"));
        if (!(p.bandwidth > 0.0 && p.tau_opo > 0.0))
            throw InvalidInput("comb_fit: bandwidth and tau_opo must be positive");
        p.n_sum = static_cast<int>(r.integer("n_sum", required_n_sum(p.bandwidth, p.tau_opo)));
        validate(p);
        out.comb_fit = p;
    }
    else if (name == "etalon")
    {
        detail::SectionReader r(body, name, text, {{"fsr", "mhz"}, {"fwhm", "mhz"}, {"detuning", "mhz"}});
        EtalonSpec e;
        e.fsr = units::mhz_to_hz(r.number("fsr_mhz"));
        e.fwhm = units::mhz_to_hz(r.number("fwhm_mhz"));
        e.detuning = units::mhz_to_hz(r.number("detuning_mhz", 0.0));
        validate(e);
        out.etalon = e;
    }
    else if (name == "simulation")
    {
        detail::SectionReader r(body, name, text,
                                {{"pair_count", ""}, {"background_ratio", ""}, {"t_min", "ps"}, {"t_max", "ps"},
                                 {"dead_before", "ps"}, {"jitter_fwhm", "ps"}, {"bin_width", "ps"}, {"seed", ""},
                                 {"duration", "s"}, {"label", ""}, {"threads", ""}});
        SimConfig c;
        const auto pairs = r.integer("pair_count", 0);
        if (pairs < 0)
            throw InvalidInput("simulation.pair_count must be non-negative");
        c.pair_count = static_cast<std::uint64_t>(pairs);
        c.background_ratio = r.number("background_ratio", 0.0);
        c.t_min = r.number("t_min_ps");
        c.t_max = r.number("t_max_ps");
        c.dead_before = r.number("dead_before_ps", 0.0);
        c.jitter_fwhm = r.number("jitter_fwhm_ps", 0.0);
        c.bin_width = r.number("bin_width_ps", 4.88);
        c.seed = static_cast<std::uint64_t>(r.integer("seed", 0));
        c.duration_s = r.number("duration_s", 0.0);
        if (r.has("label"))
            c.label = r.raw("label").get<std::string>();
        c.threads = static_cast<unsigned>(r.integer("threads", 1));
        validate(c);
        out.simulation = c;
    }
    else if (name == "fit_result")
    {
        detail::SectionReader r(body, name, text,
                                {{"objective", ""}, {"initial_objective", ""}, {"iterations", ""},
                                 {"converged", ""}, {"loss", ""}, {"stderr", ""}});
        FitSummary s;
        s.objective = r.number("objective");
        s.initial_objective = r.number("initial_objective", s.objective);
        s.iterations = static_cast<int>(r.integer("iterations", 0));
        if (r.has("converged"))
            s.converged = r.raw("converged").get<bool>();
        if (r.has("loss"))
            s.loss = parse_loss(r.raw("loss").get<std::string>());
        if (r.has("stderr"))
        {
            const auto &se = r.raw("stderr");
            std::array<double, comb_param_count> file{};
            for (std::size_t j = 0; j < comb_keys.size(); ++j)
            {
                const std::string key(comb_keys[j]);
                if (se.contains(key))
                    file[j] = se.at(key).get<double>();
            }
            s.stderr_estimates = comb_from_file_units(file);
        }
        out.fit_result = s;
    }
    else
    {
        throw ParseError("unknown section '" + name + "'", detail::line_of_key(text, name));
    }
}
} // namespace detail

inline ParamsDocument parse_params(const std::string &text)
{
    using nlohmann::json;
    json doc;
    try
    {
        doc = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw ParseError(std::string("invalid JSON: ") + e.what(), detail::line_of(text, e.byte));
    }
    if (!doc.is_object())
        throw ParseError("params document must be a JSON object", 1);

    ParamsDocument out;
    for (const auto &[name, body] : doc.items())
    {
        try
        {
            detail::parse_section(out, name, body, text);
        }
        catch (const json::exception &e)
        {
            throw ParseError("section '" + name + "': " + e.what(), detail::line_of_key(text, name));
        }
    }
    return out;
}

inline std::string format_params(const ParamsDocument &doc)
{
    nlohmann::json j = nlohmann::json::object();
    if (doc.cavity)
    {
        const auto &p = *doc.cavity;
        j["cavity"] = {{"gamma1_mhz", detail::tidy(units::rad_per_s_to_mhz(p.gamma1))},
                       {"gamma2_mhz", detail::tidy(units::rad_per_s_to_mhz(p.gamma2))},
                       {"epsilon", p.epsilon},
                       {"bandwidth_mhz", detail::tidy(units::rad_per_s_to_mhz(p.bandwidth))},
                       {"fsr_mhz", detail::tidy(units::rad_per_s_to_mhz(p.fsr))},
                       {"n_modes", p.n_modes},
                       {"finesse_ratio", p.finesse_ratio}};
    }
    if (doc.comb_fit)
    {
        const auto &p = *doc.comb_fit;
        const auto v = comb_to_file_units({p.c1, p.c2, p.bandwidth, p.tau0, p.tau_opo, p.tau_d});
        auto &s = j["comb_fit"];
        for (std::size_t k = 0; k < comb_keys.size(); ++k)
            s[std::string(comb_keys[k])] = detail::tidy(v[k]);
        s["n_sum"] = p.n_sum;
    }
    if (doc.etalon)
    {
        const auto &e = *doc.etalon;
        j["etalon"] = {{"fsr_mhz", detail::tidy(units::hz_to_mhz(e.fsr))},
                       {"fwhm_mhz", detail::tidy(units::hz_to_mhz(e.fwhm))},
                       {"detuning_mhz", detail::tidy(units::hz_to_mhz(e.detuning))}};
    }
    if (doc.simulation)
    {
        const auto &c = *doc.simulation;
        j["simulation"] = {{"pair_count", c.pair_count},   {"background_ratio", c.background_ratio},
                           {"t_min_ps", c.t_min},          {"t_max_ps", c.t_max},
                           {"dead_before_ps", c.dead_before}, {"jitter_fwhm_ps", c.jitter_fwhm},
                           {"bin_width_ps", c.bin_width},  {"seed", c.seed},
                           {"duration_s", c.duration_s},   {"label", c.label},
                           {"threads", c.threads}};
    }
    if (doc.fit_result)
    {
        const auto &s = *doc.fit_result;
        const auto se = comb_to_file_units(s.stderr_estimates);
        nlohmann::json e = nlohmann::json::object();
        for (std::size_t k = 0; k < comb_keys.size(); ++k)
            e[std::string(comb_keys[k])] = detail::tidy(se[k]);
        j["fit_result"] = {{"objective", s.objective},
                           {"initial_objective", s.initial_objective},
                           {"iterations", s.iterations},
                           {"converged", s.converged},
                           {"loss", loss_name(s.loss)},
                           {"stderr", e}};
    }
    return j.dump(2) + "\n";
}

inline ParamsDocument read_params(const std::string &path)
{
    return parse_params(read_text(path));
}

inline void write_params(const ParamsDocument &doc, const std::string &path)
{
    write_text(path, format_params(doc));
}

} // namespace opocomb::io
