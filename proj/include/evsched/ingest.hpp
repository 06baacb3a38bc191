// SPDX-License-Identifier: Apache-2.0
//
// Session-file ingestion and the synthetic dataset generator.
//
// Input is long-form delimited text, one row per occupied 15-minute slot:
//   session_id,evse_id,vap_id,slot_timestamp,avg_power_kw
// Gaps between a session's rows are idle-plugged slots. Timestamps are naive
// local time (no zone offset); every day has exactly 96 slots.
#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "evsched/errors.hpp"
#include "evsched/timegrid.hpp"
#include "evsched/util.hpp"

namespace evsched {

struct ParserOptions {
    // Readings below this are meter noise, treated as idle.
    double zero_threshold_kw = 0.01;
};

struct ParseResult {
    std::vector<ChargingSession> sessions;
    std::vector<std::string> warnings;
    size_t rows_read = 0;
    size_t rows_rejected = 0;
};

namespace detail {

struct SlotStamp {
    Date date;
    int slot = 0;
};

// "YYYY-MM-DDTHH:MM[:SS]" or with a space separator; offsets are rejected.
inline bool parse_slot_timestamp(const std::string& raw, SlotStamp& out) {
    std::string s = trim(raw);
    if (s.size() < 16) return false;
    if (s.find('Z') != std::string::npos || s.find('+') != std::string::npos) return false;
    const char sep = s[10];
    if (sep != 'T' && sep != ' ') return false;
    try {
        out.date = Date::parse(s.substr(0, 10));
    } catch (const DataError&) {
        return false;
    }
    const auto hm = split(s.substr(11), ':');
    if (hm.size() != 2 && hm.size() != 3) return false;
    bool ok1 = false, ok2 = false;
    const long h = parse_long(hm[0], ok1);
    const long m = parse_long(hm[1], ok2);
    if (!ok1 || !ok2 || h < 0 || h > 23 || m < 0 || m > 59) return false;
    if (hm.size() == 3 && trim(hm[2]) != "00") return false;
    if (m % TimeGrid::slot_minutes != 0) return false; // rows must be slot-aligned
    out.slot = static_cast<int>((h * 60 + m) / TimeGrid::slot_minutes);
    return true;
}

struct RawRow {
    SlotStamp when;
    double power_kw = 0.0;
    size_t file_order = 0;
};

} // namespace detail

inline ParseResult parse_sessions(std::istream& is, const ParserOptions& opts = {}) {
    ParseResult result;
    std::string line;
    if (!std::getline(is, line)) return result; // empty input
    auto header = split(trim(line), ',');
    for (auto& h : header) h = trim(h);
    std::map<std::string, size_t> col;
    for (size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* want : {"session_id", "evse_id", "vap_id", "slot_timestamp", "avg_power_kw"})
        if (!col.count(want)) throw DataError(std::string("missing column '") + want + "'");

    struct SessionRows {
        std::string evse_id;
        std::string vap_id;
        std::vector<detail::RawRow> rows;
    };
    std::map<std::string, SessionRows> grouped;

    size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cols = split(line, ',');
        if (cols.size() != header.size())
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " columns, got " +
                            std::to_string(cols.size()));
        ++result.rows_read;
        const std::string sid = trim(cols[col["session_id"]]);
        detail::SlotStamp when;
        if (!detail::parse_slot_timestamp(cols[col["slot_timestamp"]], when)) {
            result.warnings.push_back("line " + std::to_string(line_no) +
                                      ": unparseable or misaligned timestamp, record rejected");
            ++result.rows_rejected;
            continue;
        }
        bool ok = false;
        double power = parse_double(cols[col["avg_power_kw"]], ok);
        if (!ok) {
            result.warnings.push_back("line " + std::to_string(line_no) +
                                      ": bad power value, record rejected");
            ++result.rows_rejected;
            continue;
        }
        if (power < 0.0) {
            result.warnings.push_back("line " + std::to_string(line_no) +
                                      ": negative power, record rejected");
            ++result.rows_rejected;
            continue;
        }
        if (power < opts.zero_threshold_kw) power = 0.0;
        auto& g = grouped[sid];
        if (g.rows.empty()) {
            g.evse_id = trim(cols[col["evse_id"]]);
            g.vap_id = trim(cols[col["vap_id"]]);
        }
        g.rows.push_back({when, power, result.rows_read});
    }

    for (auto& [sid, g] : grouped) {
        auto& rows = g.rows;
        std::stable_sort(rows.begin(), rows.end(),
                         [](const detail::RawRow& a, const detail::RawRow& b) {
                             if (a.when.date != b.when.date) return a.when.date < b.when.date;
                             return a.when.slot < b.when.slot;
                         });
        // Duplicate (session, timestamp) rows: last one in file order wins.
        std::vector<detail::RawRow> dedup;
        for (const auto& r : rows) {
            if (!dedup.empty() && dedup.back().when.date == r.when.date &&
                dedup.back().when.slot == r.when.slot) {
                if (r.file_order > dedup.back().file_order) dedup.back() = r;
                result.warnings.push_back("session '" + sid +
                                          "': duplicate row at " + r.when.date.to_string() + "T" +
                                          slot_label(r.when.slot) + ", last value kept");
            } else {
                dedup.push_back(r);
            }
        }

        // Split by calendar day: the first day is the session proper; any
        // later days become fixed-load continuations excluded from
        // rescheduling.
        size_t i = 0;
        bool first_part = true;
        while (i < dedup.size()) {
            const Date date = dedup[i].when.date;
            size_t j = i;
            std::vector<double> blocks;
            std::vector<int> slots;
            int first_slot = dedup[i].when.slot, last_slot = dedup[i].when.slot;
            while (j < dedup.size() && dedup[j].when.date == date) {
                last_slot = dedup[j].when.slot;
                if (dedup[j].power_kw > 0.0) {
                    blocks.push_back(dedup[j].power_kw);
                    slots.push_back(dedup[j].when.slot);
                }
                ++j;
            }
            if (first_part) {
                result.sessions.push_back(make_session_from_blocks(
                    sid, g.evse_id, g.vap_id, date, first_slot, last_slot, std::move(blocks),
                    std::move(slots), false));
                if (j < dedup.size())
                    result.warnings.push_back("session '" + sid +
                                              "': crosses midnight, clipped to " +
                                              date.to_string() +
                                              "; overflow kept as fixed load");
                first_part = false;
            } else if (!blocks.empty()) {
                result.sessions.push_back(make_session_from_blocks(
                    sid + "~cont" + date.to_string(), g.evse_id, g.vap_id, date, slots.front(),
                    slots.back(), std::move(blocks), std::move(slots), true));
            }
            i = j;
        }
    }
    return result;
}

inline ParseResult parse_sessions_file(const std::string& path, const ParserOptions& opts = {}) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open session file '" + path + "'");
    return parse_sessions(is, opts);
}

// Writes the long-form rows back out. Only rows that define the session are
// emitted: every charge block, plus zero-power arrival/departure rows when
// those slots carry no block (idle gaps stay implicit).
inline void serialize_sessions(std::ostream& os, std::span<const ChargingSession> sessions) {
    os << "session_id,evse_id,vap_id,slot_timestamp,avg_power_kw\n";
    std::vector<const ChargingSession*> order;
    order.reserve(sessions.size());
    for (const auto& s : sessions) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](const ChargingSession* a,
                                                    const ChargingSession* b) {
        if (a->date != b->date) return a->date < b->date;
        return a->session_id < b->session_id;
    });
    for (const ChargingSession* s : order) {
        auto emit = [&](int slot, double power) {
            os << s->session_id << ',' << s->evse_id << ',' << s->vap_id << ','
               << s->date.to_string() << 'T' << slot_label(slot) << ','
               << format_double(power) << '\n';
        };
        const bool arrival_has_block =
            !s->original_slots.empty() && s->original_slots.front() == s->arrival_slot;
        const bool departure_has_block =
            !s->original_slots.empty() && s->original_slots.back() == s->departure_slot;
        if (!arrival_has_block) emit(s->arrival_slot, 0.0);
        for (size_t j = 0; j < s->charge_blocks.size(); ++j)
            emit(s->original_slots[j], s->charge_blocks[j]);
        if (!departure_has_block && s->departure_slot != s->arrival_slot)
            emit(s->departure_slot, 0.0);
    }
}

// ---------------------------------------------------------------------------
// Synthetic dataset generation.
//
// The real-world feed is proprietary; this generator produces populations
// with morning-peaked arrivals, evening-peaked departures, and a target mean
// load flexibility, deterministically for a fixed seed.

struct SyntheticConfig {
    size_t n_sessions = 0;
    uint64_t seed = 1;
    double flexibility_target = 0.5; // in [0, 1)
    std::vector<double> power_levels_kw = {3.3, 6.6};
    std::vector<double> power_weights = {0.75, 0.25};
    Date start_date{2013, 6, 1};
    int days = 30;
    int n_evse = 50;
    std::string vap_id = "VAP-1";
    double weekend_factor = 0.25; // relative session volume on Sat/Sun
    std::array<double, kSlotsPerDay> arrival_weights = default_arrival_weights();
    std::array<double, kSlotsPerDay> departure_weights = default_departure_weights();

    // Triangular shape over [05:00, 14:00], mode 08:30.
    static std::array<double, kSlotsPerDay> default_arrival_weights() {
        return triangle(20, 34, 56);
    }

    // Triangular shape over [11:00, 22:30], mode 18:00.
    static std::array<double, kSlotsPerDay> default_departure_weights() {
        return triangle(44, 72, 90);
    }

    static std::array<double, kSlotsPerDay> triangle(int lo, int mode, int hi) {
        std::array<double, kSlotsPerDay> w{};
        for (int k = lo; k <= hi; ++k) {
            double v;
            if (k <= mode)
                v = 0.05 + 0.95 * static_cast<double>(k - lo) / std::max(1, mode - lo);
            else
                v = 0.05 + 0.95 * static_cast<double>(hi - k) / std::max(1, hi - mode);
            w[static_cast<size_t>(k)] = v;
        }
        return w;
    }

    void validate() const {
        if (flexibility_target < 0.0 || flexibility_target >= 1.0)
            throw ConfigError("flexibility_target must be in [0, 1)");
        if (power_levels_kw.empty() || power_levels_kw.size() != power_weights.size())
            throw ConfigError("power_levels and power_weights must be non-empty and equal length");
        for (double p : power_levels_kw)
            if (p <= 0.0) throw ConfigError("power levels must be positive");
        if (days < 1) throw ConfigError("days must be >= 1");
        if (n_evse < 1) throw ConfigError("n_evse must be >= 1");
        double a = 0, d = 0;
        for (double w : arrival_weights) a += w;
        for (double w : departure_weights) d += w;
        if (n_sessions > 0 && (a <= 0 || d <= 0))
            throw ConfigError("arrival/departure weights must have positive mass");
    }

    // Flat key=value file; '#' starts a comment line.
    static SyntheticConfig load(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw ConfigError("cannot open generator config '" + path + "'");
        SyntheticConfig cfg;
        std::string line;
        size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("generator config line " + std::to_string(line_no) +
                                  ": expected key=value");
            const std::string key = trim(t.substr(0, eq));
            const std::string val = trim(t.substr(eq + 1));
            bool ok = true;
            if (key == "n_sessions") cfg.n_sessions = static_cast<size_t>(parse_long(val, ok));
            else if (key == "seed") cfg.seed = static_cast<uint64_t>(parse_long(val, ok));
            else if (key == "flexibility_target") cfg.flexibility_target = parse_double(val, ok);
            else if (key == "power_levels") cfg.power_levels_kw = parse_list(val, ok);
            else if (key == "power_weights") cfg.power_weights = parse_list(val, ok);
            else if (key == "start_date") cfg.start_date = Date::parse(val);
            else if (key == "days") cfg.days = static_cast<int>(parse_long(val, ok));
            else if (key == "n_evse") cfg.n_evse = static_cast<int>(parse_long(val, ok));
            else if (key == "vap_id") cfg.vap_id = val;
            else if (key == "weekend_factor") cfg.weekend_factor = parse_double(val, ok);
            else if (key == "arrival_weights") cfg.arrival_weights = parse_weights(val, ok);
            else if (key == "departure_weights") cfg.departure_weights = parse_weights(val, ok);
            else throw ConfigError("generator config: unknown key '" + key + "'");
            if (!ok)
                throw ConfigError("generator config line " + std::to_string(line_no) +
                                  ": bad value for '" + key + "'");
        }
        cfg.validate();
        return cfg;
    }

private:
    static std::vector<double> parse_list(const std::string& s, bool& ok) {
        std::vector<double> out;
        for (const auto& part : split(s, ',')) {
            bool o = false;
            out.push_back(parse_double(part, o));
            ok = ok && o;
        }
        return out;
    }

    static std::array<double, kSlotsPerDay> parse_weights(const std::string& s, bool& ok) {
        const auto values = parse_list(s, ok);
        std::array<double, kSlotsPerDay> out{};
        if (values.size() != static_cast<size_t>(kSlotsPerDay)) {
            ok = false;
            return out;
        }
        std::copy(values.begin(), values.end(), out.begin());
        return out;
    }
};

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline size_t sample_weighted(std::mt19937_64& rng, std::span<const double> weights) {
    double total = 0;
    for (double w : weights) total += w;
    double x = uniform01(rng) * total;
    for (size_t i = 0; i < weights.size(); ++i) {
        x -= weights[i];
        if (x <= 0) return i;
    }
    return weights.size() - 1;
}

} // namespace detail

inline std::vector<ChargingSession> generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    std::vector<ChargingSession> out;
    if (cfg.n_sessions == 0) return out;

    std::mt19937_64 rng(cfg.seed);
    std::vector<double> day_weights(static_cast<size_t>(cfg.days));
    for (int d = 0; d < cfg.days; ++d) {
        const Date date = cfg.start_date.plus_days(d);
        day_weights[static_cast<size_t>(d)] = date.is_weekend() ? cfg.weekend_factor : 1.0;
    }

    out.reserve(cfg.n_sessions);
    for (size_t n = 0; n < cfg.n_sessions; ++n) {
        const int day_off = static_cast<int>(detail::sample_weighted(rng, day_weights));
        const Date date = cfg.start_date.plus_days(day_off);

        const int arrival = static_cast<int>(detail::sample_weighted(rng, cfg.arrival_weights));
        int departure = -1;
        for (int tries = 0; tries < 1000; ++tries) {
            const int d = static_cast<int>(detail::sample_weighted(rng, cfg.departure_weights));
            if (d > arrival) {
                departure = d;
                break;
            }
        }
        if (departure < 0) {
            // No departure mass after this arrival; take the nearest feasible slot.
            for (int k = arrival + 1; k < kSlotsPerDay; ++k)
                if (cfg.departure_weights[static_cast<size_t>(k)] > 0) {
                    departure = k;
                    break;
                }
        }
        if (departure < 0)
            throw ConfigError("synthetic config infeasible: no departure slot after arrival " +
                              slot_label(arrival));

        const int window = departure - arrival + 1;
        // Stochastic rounding keeps the population mean of (window-M)/window
        // at the flexibility target.
        const double want = (1.0 - cfg.flexibility_target) * window;
        int m = static_cast<int>(want);
        if (detail::uniform01(rng) < want - static_cast<double>(m)) ++m;
        m = std::clamp(m, 1, window);

        const size_t level_idx = detail::sample_weighted(rng, cfg.power_weights);
        const double level = cfg.power_levels_kw[level_idx];
        static constexpr double tapers[] = {1.0, 0.5, 0.25};
        const double taper = tapers[rng() % 3];

        std::vector<double> blocks(static_cast<size_t>(m), level);
        blocks.back() = level * taper; // partial final block
        std::vector<int> slots(static_cast<size_t>(m));
        for (int j = 0; j < m; ++j) slots[static_cast<size_t>(j)] = arrival + j;

        char sid[24], eid[24];
        std::snprintf(sid, sizeof(sid), "S%06zu", n);
        std::snprintf(eid, sizeof(eid), "E%04zu", static_cast<size_t>(rng() % cfg.n_evse));
        out.push_back(make_session_from_blocks(sid, eid, cfg.vap_id, date, arrival, departure,
                                               std::move(blocks), std::move(slots)));
    }
    std::stable_sort(out.begin(), out.end(), [](const ChargingSession& a, const ChargingSession& b) {
        if (a.date != b.date) return a.date < b.date;
        return a.session_id < b.session_id;
    });
    return out;
}

} // namespace evsched
