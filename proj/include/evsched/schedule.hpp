// SPDX-License-Identifier: Apache-2.0
//
// Slot-assignment schedules and their constraint system.
//
// A schedule assigns each session's charge blocks to slots. Feasibility means,
// for every session i and block j:
//   t_start <= t_j <= t_end      (optimization window)
//   arrival <= t_j <= departure  (session window, departure inclusive)
//   t_j < t_{j+1}                (blocks keep their original order)
// Blocks outside the optimization window, and whole sessions flagged as fixed
// load, must stay at their original slots; they still count toward the
// aggregate power.
#pragma once

#include <array>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "evsched/errors.hpp"
#include "evsched/timegrid.hpp"
#include "evsched/util.hpp"

namespace evsched {

struct Schedule {
    int t_start = 0;
    int t_end = kSlotsPerDay - 1;
    // assigned[i][j] = slot of session i's j-th charge block, aligned with the
    // session list the schedule was built against.
    std::vector<std::vector<int>> assigned;
};

// Feasible slot range of one block: the session window clipped to the
// optimization window for movable blocks, the original slot for fixed ones.
struct BlockRange {
    int lo = 0;
    int hi = -1;
    bool movable = false;
};

inline BlockRange block_range(const ChargingSession& s, int block, int t_start, int t_end) {
    const int orig = s.original_slots[static_cast<size_t>(block)];
    const bool movable = !s.fixed_load && orig >= t_start && orig <= t_end;
    if (!movable) return {orig, orig, false};
    return {std::max(s.arrival_slot, t_start), std::min(s.departure_slot, t_end), true};
}

// The as-measured schedule: every block at its original slot.
inline Schedule baseline_schedule(std::span<const ChargingSession> sessions, int t_start = 0,
                                  int t_end = kSlotsPerDay - 1) {
    Schedule sch;
    sch.t_start = t_start;
    sch.t_end = t_end;
    sch.assigned.reserve(sessions.size());
    for (const auto& s : sessions) sch.assigned.push_back(s.original_slots);
    return sch;
}

enum class ViolationKind {
    block_count,
    window_low,     // below t_start
    window_high,    // above t_end
    arrival_bound,  // before session arrival
    departure_bound,// after session departure
    ordering,       // t_j >= t_{j+1}
    fixed_moved,    // fixed block not at its original slot
};

inline const char* to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::block_count: return "block_count";
        case ViolationKind::window_low: return "window_low";
        case ViolationKind::window_high: return "window_high";
        case ViolationKind::arrival_bound: return "arrival_bound";
        case ViolationKind::departure_bound: return "departure_bound";
        case ViolationKind::ordering: return "ordering";
        case ViolationKind::fixed_moved: return "fixed_moved";
    }
    return "?";
}

struct Violation {
    size_t session_index = 0;
    std::string session_id;
    int block = -1;
    ViolationKind kind{};
};

// Checks every constraint family; violations are data, not errors.
inline std::vector<Violation> validate_schedule(const Schedule& sch,
                                                std::span<const ChargingSession> sessions) {
    std::vector<Violation> out;
    if (sch.assigned.size() != sessions.size()) {
        out.push_back({0, "", -1, ViolationKind::block_count});
        return out;
    }
    for (size_t i = 0; i < sessions.size(); ++i) {
        const auto& s = sessions[i];
        const auto& slots = sch.assigned[i];
        if (static_cast<int>(slots.size()) != s.block_count()) {
            out.push_back({i, s.session_id, -1, ViolationKind::block_count});
            continue;
        }
        for (int j = 0; j < s.block_count(); ++j) {
            const int t = slots[static_cast<size_t>(j)];
            const auto range = block_range(s, j, sch.t_start, sch.t_end);
            if (!range.movable) {
                if (t != s.original_slots[static_cast<size_t>(j)])
                    out.push_back({i, s.session_id, j, ViolationKind::fixed_moved});
            } else {
                if (t < sch.t_start) out.push_back({i, s.session_id, j, ViolationKind::window_low});
                if (t > sch.t_end) out.push_back({i, s.session_id, j, ViolationKind::window_high});
                if (t < s.arrival_slot)
                    out.push_back({i, s.session_id, j, ViolationKind::arrival_bound});
                if (t > s.departure_slot)
                    out.push_back({i, s.session_id, j, ViolationKind::departure_bound});
            }
            if (j > 0 && slots[static_cast<size_t>(j - 1)] >= t)
                out.push_back({i, s.session_id, j, ViolationKind::ordering});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Aggregate power.

struct AggregateProfile {
    std::array<double, kSlotsPerDay> ap{}; // kW per slot
    Date day;
    std::string vap_id;

    double energy_kwh() const {
        double s = 0;
        for (double v : ap) s += v;
        return s * kSlotHours;
    }
};

// Unchecked accumulation for solver hot paths.
inline void add_session_load(std::array<double, kSlotsPerDay>& ap, const ChargingSession& s,
                             std::span<const int> slots, double sign = 1.0) {
    for (size_t j = 0; j < s.charge_blocks.size(); ++j)
        ap[static_cast<size_t>(slots[j])] += sign * s.charge_blocks[j];
}

inline AggregateProfile aggregate_power(const Schedule& sch,
                                        std::span<const ChargingSession> sessions,
                                        Date day = {}, std::string vap_id = {}) {
    const auto violations = validate_schedule(sch, sessions);
    if (!violations.empty()) {
        const auto& v = violations.front();
        throw DataError("invalid schedule: session '" + v.session_id + "' block " +
                        std::to_string(v.block) + " violates " + to_string(v.kind) + " (" +
                        std::to_string(violations.size()) + " violations total)");
    }
    AggregateProfile out;
    out.day = day;
    out.vap_id = std::move(vap_id);
    for (size_t i = 0; i < sessions.size(); ++i)
        add_session_load(out.ap, sessions[i], sch.assigned[i]);
    return out;
}

struct ProfileStats {
    double max_kw = 0.0;
    double energy_kwh = 0.0;
};

inline ProfileStats profile_stats(const AggregateProfile& profile, const SlotSet& period) {
    if (period.none()) throw ConfigError("profile_stats: empty period");
    ProfileStats st;
    for (int k = 0; k < kSlotsPerDay; ++k) {
        if (!period.test(static_cast<size_t>(k))) continue;
        const double v = profile.ap[static_cast<size_t>(k)];
        st.max_kw = std::max(st.max_kw, v);
        st.energy_kwh += v * kSlotHours;
    }
    return st;
}

// ---------------------------------------------------------------------------
// Serialization: one row per charge block.

inline void serialize_schedule(std::ostream& os, const Schedule& sch,
                               std::span<const ChargingSession> sessions) {
    os << "session_id,block_index,assigned_slot\n";
    for (size_t i = 0; i < sessions.size(); ++i)
        for (size_t j = 0; j < sch.assigned[i].size(); ++j)
            os << sessions[i].session_id << ',' << j << ',' << sch.assigned[i][j] << '\n';
}

inline Schedule parse_schedule(std::istream& is, std::span<const ChargingSession> sessions,
                               int t_start = 0, int t_end = kSlotsPerDay - 1) {
    std::map<std::string, size_t> index;
    for (size_t i = 0; i < sessions.size(); ++i) index[sessions[i].session_id] = i;
    Schedule sch;
    sch.t_start = t_start;
    sch.t_end = t_end;
    sch.assigned.resize(sessions.size());
    for (size_t i = 0; i < sessions.size(); ++i)
        sch.assigned[i].assign(sessions[i].charge_blocks.size(), -1);
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line_no == 1 || trim(line).empty()) continue; // header
        const auto cols = split(line, ',');
        if (cols.size() != 3)
            throw DataError("schedule line " + std::to_string(line_no) + ": want 3 columns");
        auto it = index.find(trim(cols[0]));
        if (it == index.end())
            throw DataError("schedule line " + std::to_string(line_no) + ": unknown session '" +
                            cols[0] + "'");
        bool ok1 = false, ok2 = false;
        const long j = parse_long(cols[1], ok1);
        const long slot = parse_long(cols[2], ok2);
        auto& vec = sch.assigned[it->second];
        if (!ok1 || !ok2 || j < 0 || j >= static_cast<long>(vec.size()))
            throw DataError("schedule line " + std::to_string(line_no) + ": bad block index");
        vec[static_cast<size_t>(j)] = static_cast<int>(slot);
    }
    for (size_t i = 0; i < sch.assigned.size(); ++i)
        for (int t : sch.assigned[i])
            if (t < 0)
                throw DataError("schedule: missing block assignment for session '" +
                                sessions[i].session_id + "'");
    return sch;
}

} // namespace evsched
