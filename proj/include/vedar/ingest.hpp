#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vedar/core.hpp"
#include "vedar/random.hpp"

namespace vedar {

// --- timestamps ---------------------------------------------------------
// NAB stamps are naive "YYYY-MM-DD HH:MM:SS[.ffffff]"; we read them as UTC.
// Only ordering and a fixed sampling interval matter downstream.

namespace detail {
// days since 1970-01-01 (Howard Hinnant's civil-days algorithm)
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}
}  // namespace detail

inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
    // strip fractional seconds
    if (auto dot = s.find('.'); dot != std::string_view::npos) s = s.substr(0, dot);
    int y, mo, d, h, mi, se;
    if (std::sscanf(std::string(s).c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &se) != 6)
        return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || se < 0 ||
        se > 60)
        return std::nullopt;
    return detail::days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
}

inline std::string format_timestamp(Timestamp t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    // invert days_from_civil
    std::int64_t z = days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u %02lld:%02lld:%02lld",
                  static_cast<long long>(y + (m <= 2)), m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem % 3600) / 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

// --- dataset loading -----------------------------------------------------

struct Dataset {
    std::string name;
    std::vector<TimedValue> points;

    // Modal gap between consecutive rows, in seconds. Rows are never
    // resampled; gaps are treated as absent samples.
    std::int64_t sample_interval() const {
        if (points.size() < 2) return 300;
        std::map<std::int64_t, std::size_t> gaps;
        for (std::size_t i = 1; i < points.size(); ++i)
            ++gaps[points[i].timestamp - points[i - 1].timestamp];
        std::int64_t best = 300;
        std::size_t best_n = 0;
        for (auto& [gap, n] : gaps)
            if (n > best_n) {
                best_n = n;
                best = gap;
            }
        return best;
    }
};

inline Dataset load_nab_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StreamError("cannot open " + path);
    Dataset ds;
    ds.name = path;
    std::string line;
    std::size_t line_no = 0;
    std::optional<Timestamp> prev;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "timestamp,value")
                throw MalformedRow("expected header 'timestamp,value', got '" + line + "'", 1);
            continue;
        }
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw MalformedRow("missing comma", line_no);
        auto ts = parse_timestamp(std::string_view(line).substr(0, comma));
        if (!ts) throw MalformedRow("unparseable timestamp '" + line.substr(0, comma) + "'", line_no);
        double value;
        const char* b = line.data() + comma + 1;
        const char* e = line.data() + line.size();
        auto [ptr, ec] = std::from_chars(b, e, value);
        if (ec != std::errc() || ptr != e) throw MalformedRow("unparseable value", line_no);
        TimedValue p{*ts, value};
        try {
            validate_point(prev, p);
        } catch (const NonMonotonicTimestamp&) {
            throw MalformedRow("non-monotonic timestamp", line_no);
        } catch (const NonFiniteValue&) {
            throw MalformedRow("non-finite value", line_no);
        }
        prev = p.timestamp;
        ds.points.push_back(p);
    }
    return ds;
}

inline void write_nab_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw StreamError("cannot write " + path);
    out << "timestamp,value\n";
    char buf[64];
    for (const auto& p : ds.points) {
        std::snprintf(buf, sizeof buf, "%.17g", p.value);
        out << format_timestamp(p.timestamp) << ',' << buf << '\n';
    }
}

// --- label windows -------------------------------------------------------

struct LabelWindows {
    // dataset key (NAB relative path) -> sorted, non-overlapping intervals
    std::map<std::string, std::vector<std::pair<Timestamp, Timestamp>>> windows;
};

// combined_windows.json is a flat map from dataset key to a list of
// [start, end] timestamp-string pairs; parsed here without a JSON library
// dependency in the header (the CLI uses nlohmann for its own output).
inline LabelWindows load_label_windows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedWindows("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();

    LabelWindows out;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\n' || text[i] == '\t' ||
                                   text[i] == '\r' || text[i] == ','))
            ++i;
    };
    auto parse_string = [&]() -> std::string {
        if (i >= text.size() || text[i] != '"') throw MalformedWindows("expected string in " + path);
        ++i;
        std::string s;
        while (i < text.size() && text[i] != '"') {
            if (text[i] == '\\' && i + 1 < text.size()) ++i;
            s += text[i++];
        }
        if (i >= text.size()) throw MalformedWindows("unterminated string in " + path);
        ++i;
        return s;
    };
    skip_ws();
    if (i >= text.size() || text[i] != '{') throw MalformedWindows("expected top-level object");
    ++i;
    skip_ws();
    while (i < text.size() && text[i] != '}') {
        std::string key = parse_string();
        skip_ws();
        if (i >= text.size() || text[i] != ':') throw MalformedWindows("expected ':'");
        ++i;
        skip_ws();
        if (i >= text.size() || text[i] != '[') throw MalformedWindows("expected window list");
        ++i;
        skip_ws();
        std::vector<std::pair<Timestamp, Timestamp>> wins;
        while (i < text.size() && text[i] != ']') {
            if (text[i] != '[') throw MalformedWindows("expected window pair");
            ++i;
            skip_ws();
            std::string a = parse_string();
            skip_ws();
            std::string b = parse_string();
            skip_ws();
            if (i >= text.size() || text[i] != ']') throw MalformedWindows("expected window close");
            ++i;
            skip_ws();
            auto ta = parse_timestamp(a);
            auto tb = parse_timestamp(b);
            if (!ta || !tb) throw MalformedWindows("unparseable window timestamp");
            if (*tb < *ta) throw MalformedWindows("window end before start");
            wins.emplace_back(*ta, *tb);
        }
        if (i >= text.size()) throw MalformedWindows("unterminated window list");
        ++i;
        for (std::size_t w = 1; w < wins.size(); ++w)
            if (wins[w].first <= wins[w - 1].second)
                throw MalformedWindows("windows overlap or unsorted for " + key);
        out.windows[key] = std::move(wins);
        skip_ws();
    }
    if (i >= text.size()) throw MalformedWindows("unterminated top-level object");
    return out;
}

// --- synthetic streams ---------------------------------------------------

struct GroundTruth {
    ChangeType type;
    std::size_t begin;
    std::size_t end;  // inclusive
};

struct SynthResult {
    Dataset data;
    std::vector<GroundTruth> truth;
};

inline Dataset make_dataset(const std::string& name, const std::vector<double>& values,
                            std::int64_t interval = 300,
                            Timestamp start = 1388534400 /* 2014-01-01 */) {
    Dataset ds;
    ds.name = name;
    ds.points.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        ds.points.push_back({start + static_cast<Timestamp>(i) * interval, values[i]});
    return ds;
}

struct LinearThenPeriodicParams {
    std::uint64_t seed = 42;
    std::size_t length = 2600;
    std::size_t flat_len = 400;
    std::size_t ramp_len = 60;
    double base = 20.0;
    double upper = 80.0;
    int period = 96;
    double wave_amp = 5.0;
    double noise_sigma = 1.0;
    std::vector<std::pair<std::size_t, double>> spikes = {{1500, 250.0}, {1900, 300.0}};
};

// Fig-4 anatomy: a flat lead-in, a linear climb to the upper limit, then a
// periodic wave with injected spikes. Ground truth: one linear change over
// the ramp, one erratic change per spike.
inline SynthResult synth_linear_then_periodic(const LinearThenPeriodicParams& p = {}) {
    Rng rng(p.seed);
    std::vector<double> v(p.length);
    for (std::size_t t = 0; t < p.length; ++t) {
        double x;
        if (t < p.flat_len) {
            x = p.base;
        } else if (t < p.flat_len + p.ramp_len) {
            x = p.base + (p.upper - p.base) * static_cast<double>(t - p.flat_len) /
                             static_cast<double>(p.ramp_len);
        } else {
            x = p.upper + p.wave_amp * std::sin(2.0 * M_PI *
                                                static_cast<double>(t - p.flat_len - p.ramp_len) /
                                                p.period);
        }
        v[t] = x + rng.next_normal(0.0, p.noise_sigma);
    }
    SynthResult out;
    out.truth.push_back({ChangeType::Linear, p.flat_len, p.flat_len + p.ramp_len});
    for (auto& [idx, mag] : p.spikes) {
        if (idx < p.length) {
            v[idx] += mag;
            out.truth.push_back({ChangeType::Erratic, idx, idx});
        }
    }
    out.data = make_dataset("synth/linear_then_periodic", v);
    return out;
}

struct PeriodShiftParams {
    std::uint64_t seed = 42;
    int period_a = 288;
    int period_b = 576;
    std::size_t shift_at = 4032;
    std::size_t length = 12096;
    double low = 10.0;
    double high = 30.0;
    double noise_sigma = 0.5;
};

// Fig-6 anatomy: periodic steps whose period doubles at shift_at.
inline SynthResult synth_period_shift(const PeriodShiftParams& p = {}) {
    Rng rng(p.seed);
    std::vector<double> v(p.length);
    for (std::size_t t = 0; t < p.length; ++t) {
        int period = t < p.shift_at ? p.period_a : p.period_b;
        std::size_t phase = (t < p.shift_at ? t : t - p.shift_at) % static_cast<std::size_t>(period);
        double x = phase < static_cast<std::size_t>(period / 2) ? p.high : p.low;
        v[t] = x + rng.next_normal(0.0, p.noise_sigma);
    }
    SynthResult out;
    if (p.shift_at > 0 && p.shift_at < p.length && p.period_a != p.period_b)
        out.truth.push_back({ChangeType::SeasonalInterruption, p.shift_at, p.shift_at});
    out.data = make_dataset("synth/period_shift", v);
    return out;
}

enum class SeasonalShape { Sine, Spike };

struct SeasonalNoiseParams {
    std::uint64_t seed = 42;
    int period = 224;
    std::size_t length = 4480;
    double base = 50.0;
    double amp = 20.0;
    double noise_sigma = 1.0;
    SeasonalShape shape = SeasonalShape::Sine;
    double spike_width_frac = 0.05;
};

// Fig-7 anatomy: periodic peaks and troughs with additive noise. Spike shape
// gives an rds-style train of narrow seasonal spikes instead of a sine.
inline SynthResult synth_seasonal_with_noise(const SeasonalNoiseParams& p = {}) {
    Rng rng(p.seed);
    std::vector<double> v(p.length);
    auto w = static_cast<std::size_t>(
        std::max(2.0, p.spike_width_frac * static_cast<double>(p.period)));
    for (std::size_t t = 0; t < p.length; ++t) {
        double x = p.base;
        if (p.period >= 2) {
            std::size_t phase = t % static_cast<std::size_t>(p.period);
            if (p.shape == SeasonalShape::Sine)
                x += p.amp * std::sin(2.0 * M_PI * static_cast<double>(phase) / p.period);
            else if (phase < w)
                x += p.amp;
        }
        v[t] = x + rng.next_normal(0.0, p.noise_sigma);
    }
    SynthResult out;
    out.data = make_dataset("synth/seasonal_with_noise", v);
    return out;
}

}  // namespace vedar
