// SPDX-License-Identifier: Apache-2.0
//
// Time discretization and the charging-session record.
//
// A day is a fixed grid of 96 fifteen-minute slots. Slot k covers the clock
// interval [k*15min, (k+1)*15min) from local midnight. All power values are
// 15-minute averages in kW, so one occupied slot carries kW * 0.25 kWh.
#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "evsched/errors.hpp"
#include "evsched/util.hpp"

namespace evsched {

struct TimeGrid {
    static constexpr int slots_per_day = 96;
    static constexpr int slot_minutes = 15;
    static constexpr double slot_hours = 0.25;
    static_assert(slots_per_day * slot_minutes == 1440);
};

constexpr int kSlotsPerDay = TimeGrid::slots_per_day;
constexpr double kSlotHours = TimeGrid::slot_hours;

using SlotSet = std::bitset<kSlotsPerDay>;

// Slot index containing the given wall-clock time. [00:00, 24:00) only.
inline int slot_of_time(int hour, int minute) {
    if (hour < 0 || hour > 23 || minute < 0 || minute > 59)
        throw ConfigError("clock time out of range: " + std::to_string(hour) + ":" +
                          std::to_string(minute));
    return (hour * 60 + minute) / TimeGrid::slot_minutes;
}

// Grid boundary in [0, 96] for "HH:MM" with 24:00 allowed as the day end.
// Boundaries must be 15-minute aligned; used for tariff and peak periods.
inline int slot_bound_of_time(const std::string& hhmm) {
    const auto parts = split(hhmm, ':');
    bool ok1 = false, ok2 = false;
    long h = parts.size() == 2 ? parse_long(parts[0], ok1) : 0;
    long m = parts.size() == 2 ? parse_long(parts[1], ok2) : 0;
    if (!ok1 || !ok2 || h < 0 || h > 24 || m < 0 || m > 59 || (h == 24 && m != 0))
        throw ConfigError("bad clock time '" + hhmm + "'");
    const long total = h * 60 + m;
    if (total % TimeGrid::slot_minutes != 0)
        throw ConfigError("period boundary '" + hhmm + "' is not 15-minute aligned");
    return static_cast<int>(total / TimeGrid::slot_minutes);
}

inline std::string slot_label(int slot) {
    const int minutes = slot * TimeGrid::slot_minutes;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d:%02d", minutes / 60, minutes % 60);
    return buf;
}

// Slot set for [start, end) clock bounds; wraps past midnight when end <= start.
inline SlotSet slots_in_range(const std::string& start_hhmm, const std::string& end_hhmm) {
    const int a = slot_bound_of_time(start_hhmm);
    const int b = slot_bound_of_time(end_hhmm);
    SlotSet s;
    if (a == b) return s;
    if (a < b) {
        for (int k = a; k < b; ++k) s.set(static_cast<size_t>(k));
    } else { // wraps midnight, e.g. 21:30-08:30
        for (int k = a; k < kSlotsPerDay; ++k) s.set(static_cast<size_t>(k));
        for (int k = 0; k < b; ++k) s.set(static_cast<size_t>(k));
    }
    return s;
}

// ---------------------------------------------------------------------------
// Calendar dates (local time, no DST: every day is exactly 96 slots).

struct Date {
    int year = 0;
    int month = 0; // 1..12
    int day = 0;   // 1..31

    auto operator<=>(const Date&) const = default;

    static bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

    static int days_in_month(int y, int m) {
        static constexpr int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
        if (m < 1 || m > 12) throw ConfigError("month out of range: " + std::to_string(m));
        return (m == 2 && is_leap(y)) ? 29 : d[m - 1];
    }

    bool valid() const {
        return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
    }

    // Days since 1970-01-01 (civil-from-days algorithm).
    long to_days() const {
        long y = year;
        const int m = month;
        y -= m <= 2;
        const long era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                             static_cast<unsigned>(day) - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return era * 146097 + static_cast<long>(doe) - 719468;
    }

    static Date from_days(long z) {
        z += 719468;
        const long era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const long y = static_cast<long>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp + (mp < 10 ? 3 : -9);
        return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
    }

    Date plus_days(long n) const { return from_days(to_days() + n); }

    // 0 = Monday ... 6 = Sunday.
    int weekday() const {
        const long z = to_days();
        return static_cast<int>(((z % 7) + 10) % 7);
    }

    bool is_weekend() const { return weekday() >= 5; }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
        return buf;
    }

    static Date parse(const std::string& s) {
        const auto parts = split(s, '-');
        bool a = false, b = false, c = false;
        if (parts.size() != 3) throw DataError("bad date '" + s + "'");
        Date d{static_cast<int>(parse_long(parts[0], a)), static_cast<int>(parse_long(parts[1], b)),
               static_cast<int>(parse_long(parts[2], c))};
        if (!a || !b || !c || !d.valid()) throw DataError("bad date '" + s + "'");
        return d;
    }
};

struct Month {
    int year = 0;
    int month = 0;

    auto operator<=>(const Month&) const = default;

    int n_days() const { return Date::days_in_month(year, month); }
    Date first_day() const { return Date{year, month, 1}; }
    Date day(int d) const { return Date{year, month, d}; }
    bool contains(const Date& d) const { return d.year == year && d.month == month; }

    std::string to_string() const {
        char buf[12];
        std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
        return buf;
    }

    static Month of(const Date& d) { return Month{d.year, d.month}; }

    static Month parse(const std::string& s) {
        const auto parts = split(s, '-');
        bool a = false, b = false;
        if (parts.size() != 2) throw ConfigError("bad month '" + s + "' (want YYYY-MM)");
        Month m{static_cast<int>(parse_long(parts[0], a)), static_cast<int>(parse_long(parts[1], b))};
        if (!a || !b || m.month < 1 || m.month > 12) throw ConfigError("bad month '" + s + "'");
        return m;
    }
};

// ---------------------------------------------------------------------------
// Charging sessions.

// Splits a raw per-slot power series into its strictly positive charge blocks
// and the slots where they occurred. An all-zero series yields empty vectors.
inline std::pair<std::vector<double>, std::vector<int>> extract_charge_blocks(
    std::span<const double> raw_power) {
    std::vector<double> q;
    std::vector<int> slots;
    for (size_t k = 0; k < raw_power.size(); ++k) {
        if (raw_power[k] > 0.0) {
            q.push_back(raw_power[k]);
            slots.push_back(static_cast<int>(k));
        }
    }
    return {std::move(q), std::move(slots)};
}

// One plug-in -> departure record. The charge blocks are the session's
// non-zero 15-minute power readings in original order; rescheduling moves the
// blocks without altering their values or relative order, so session energy
// is invariant under any schedule.
struct ChargingSession {
    std::string session_id;
    std::string evse_id;
    std::string vap_id;
    Date date;
    int arrival_slot = 0;
    int departure_slot = 0;                // inclusive: a block may occupy it
    std::vector<double> charge_blocks;     // Q, all > 0, original order
    std::vector<int> original_slots;       // strictly increasing, within [arrival, departure]
    bool fixed_load = false;               // true: excluded from rescheduling

    int block_count() const { return static_cast<int>(charge_blocks.size()); }
    int window_slots() const { return departure_slot - arrival_slot + 1; }

    double energy_kwh() const {
        double s = 0;
        for (double q : charge_blocks) s += q;
        return s * kSlotHours;
    }

    std::array<double, kSlotsPerDay> raw_power() const {
        std::array<double, kSlotsPerDay> p{};
        for (size_t j = 0; j < charge_blocks.size(); ++j)
            p[static_cast<size_t>(original_slots[j])] = charge_blocks[j];
        return p;
    }

    void validate() const {
        auto fail = [&](const std::string& why) {
            throw DataError("session '" + session_id + "': " + why);
        };
        if (arrival_slot < 0 || arrival_slot >= kSlotsPerDay) fail("arrival slot out of range");
        if (departure_slot < arrival_slot || departure_slot >= kSlotsPerDay)
            fail("departure slot out of range");
        if (charge_blocks.size() != original_slots.size()) fail("block/slot size mismatch");
        if (block_count() > window_slots()) fail("more charge blocks than slots in window");
        int prev = -1;
        for (size_t j = 0; j < original_slots.size(); ++j) {
            if (charge_blocks[j] <= 0.0) fail("non-positive charge block");
            const int s = original_slots[j];
            if (s < arrival_slot || s > departure_slot) fail("charge block outside window");
            if (s <= prev) fail("charge block slots not strictly increasing");
            prev = s;
        }
    }
};

inline ChargingSession make_session_from_blocks(std::string session_id, std::string evse_id,
                                                std::string vap_id, Date date, int arrival_slot,
                                                int departure_slot, std::vector<double> blocks,
                                                std::vector<int> slots, bool fixed_load = false) {
    ChargingSession s;
    s.session_id = std::move(session_id);
    s.evse_id = std::move(evse_id);
    s.vap_id = std::move(vap_id);
    s.date = date;
    s.arrival_slot = arrival_slot;
    s.departure_slot = departure_slot;
    s.charge_blocks = std::move(blocks);
    s.original_slots = std::move(slots);
    s.fixed_load = fixed_load;
    s.validate();
    return s;
}

inline ChargingSession make_session_from_raw(std::string session_id, std::string evse_id,
                                             std::string vap_id, Date date, int arrival_slot,
                                             int departure_slot,
                                             std::span<const double> raw_power) {
    for (size_t k = 0; k < raw_power.size(); ++k) {
        const int slot = static_cast<int>(k);
        if (raw_power[k] != 0.0 && (slot < arrival_slot || slot > departure_slot))
            throw DataError("session '" + session_id + "': power outside [arrival, departure]");
    }
    auto [q, slots] = extract_charge_blocks(raw_power);
    return make_session_from_blocks(std::move(session_id), std::move(evse_id), std::move(vap_id),
                                    date, arrival_slot, departure_slot, std::move(q),
                                    std::move(slots));
}

inline double session_energy(const ChargingSession& s) { return s.energy_kwh(); }

// ---------------------------------------------------------------------------
// Virtual aggregation points.

struct Vap {
    std::string vap_id;
    std::set<std::string> zip_codes;
    std::set<std::string> evse_ids;
};

// Groups EVSEs by VAP. An EVSE reported under two different VAPs is a data error.
inline std::map<std::string, Vap> build_vaps(std::span<const ChargingSession> sessions) {
    std::map<std::string, Vap> vaps;
    std::map<std::string, std::string> evse_owner;
    for (const auto& s : sessions) {
        auto [it, inserted] = evse_owner.emplace(s.evse_id, s.vap_id);
        if (!inserted && it->second != s.vap_id)
            throw DataError("EVSE '" + s.evse_id + "' appears in VAPs '" + it->second + "' and '" +
                            s.vap_id + "'");
        auto& vap = vaps[s.vap_id];
        vap.vap_id = s.vap_id;
        vap.evse_ids.insert(s.evse_id);
    }
    return vaps;
}

} // namespace evsched
