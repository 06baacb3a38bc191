// SPDX-License-Identifier: Apache-2.0
//
// Seasonal TOU rate structures and the monthly billing engine.
//
// A tariff is a set of seasons keyed by calendar month. Within a season,
// energy-rate periods partition the 96-slot day exactly; demand-rate periods
// may overlap (an "anytime" maximum-demand period typically spans all slots).
// The monthly bill is the sum of per-day energy charges plus, per demand
// period, the month's running maximum 15-minute average power times the
// period's demand rate.
#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "evsched/errors.hpp"
#include "evsched/timegrid.hpp"

namespace evsched {

struct RatePeriod {
    std::string name;
    SlotSet slots;
    std::optional<double> energy_rate; // $/kWh
    std::optional<double> demand_rate; // $/kW
};

struct Season {
    std::string name;
    std::set<int> months; // 1..12
    std::vector<RatePeriod> periods;
    std::array<double, kSlotsPerDay> energy_rate_by_slot{};

    std::vector<const RatePeriod*> demand_periods() const {
        std::vector<const RatePeriod*> out;
        for (const auto& p : periods)
            if (p.demand_rate) out.push_back(&p);
        return out;
    }
};

class TariffSchedule {
public:
    std::string name;
    std::vector<Season> seasons;

    const Season& season_of(const Date& d) const { return season_of_month(d.month); }

    const Season& season_of_month(int month) const {
        for (const auto& s : seasons)
            if (s.months.count(month)) return s;
        throw ConfigError("tariff '" + name + "': no season covers month " +
                          std::to_string(month));
    }

    // Checks the structural invariants and caches the per-slot energy rates.
    void finalize() {
        std::set<int> covered;
        for (auto& season : seasons) {
            for (int m : season.months) {
                if (m < 1 || m > 12)
                    throw ConfigError("tariff '" + name + "': month out of range");
                if (!covered.insert(m).second)
                    throw ConfigError("tariff '" + name + "': month " + std::to_string(m) +
                                      " assigned to two seasons");
            }
            SlotSet energy_union;
            for (auto& p : season.periods) {
                if (!p.energy_rate && !p.demand_rate)
                    throw ConfigError("tariff '" + name + "': period '" + p.name +
                                      "' has neither energy nor demand rate");
                if (p.slots.none())
                    throw ConfigError("tariff '" + name + "': period '" + p.name +
                                      "' covers no slots");
                if (p.energy_rate) {
                    if ((energy_union & p.slots).any())
                        throw ConfigError("tariff '" + name + "': season '" + season.name +
                                          "' energy periods overlap at '" + p.name + "'");
                    energy_union |= p.slots;
                    for (int k = 0; k < kSlotsPerDay; ++k)
                        if (p.slots.test(static_cast<size_t>(k)))
                            season.energy_rate_by_slot[static_cast<size_t>(k)] = *p.energy_rate;
                }
            }
            if (!energy_union.all())
                throw ConfigError("tariff '" + name + "': season '" + season.name +
                                  "' energy periods do not cover all 96 slots");
        }
        if (covered.size() != 12)
            throw ConfigError("tariff '" + name + "': seasons do not cover all 12 months");
    }

    // PG&E E-19 style two-season TOU schedule, summer = May 1 .. Oct 31.
    static TariffSchedule e19() {
        TariffSchedule t;
        t.name = "E-19";
        Season summer;
        summer.name = "summer";
        summer.months = {5, 6, 7, 8, 9, 10};
        summer.periods = {
            {"peak", slots_in_range("12:00", "18:00"), 0.16253, 19.71253},
            {"part-peak", slots_in_range("08:30", "12:00") | slots_in_range("18:00", "21:30"),
             0.11156, 4.07},
            {"off-peak", slots_in_range("21:30", "08:30"), 0.07818, std::nullopt},
            {"anytime", slots_in_range("00:00", "24:00"), std::nullopt, 12.56},
        };
        Season winter;
        winter.name = "winter";
        winter.months = {1, 2, 3, 4, 11, 12};
        winter.periods = {
            {"part-peak", slots_in_range("08:30", "21:30"), 0.10479, 0.21},
            {"off-peak", slots_in_range("21:30", "08:30"), 0.08200, std::nullopt},
            {"anytime", slots_in_range("00:00", "24:00"), std::nullopt, 12.56},
        };
        t.seasons = {summer, winter};
        t.finalize();
        return t;
    }

    // Schema: {"name": ..., "seasons": [{"season": ..., "months": [...],
    //          "periods": [{"name", "ranges": ["HH:MM-HH:MM", ...],
    //                       "energy_rate"?, "demand_rate"?}]}]}
    static TariffSchedule from_json(const nlohmann::json& j) {
        TariffSchedule t;
        try {
            t.name = j.value("name", "custom");
            if (!j.contains("seasons") || !j["seasons"].is_array())
                throw ConfigError("tariff config: missing 'seasons' array");
            for (const auto& js : j["seasons"]) {
                Season season;
                season.name = js.at("season").get<std::string>();
                for (const auto& m : js.at("months")) season.months.insert(m.get<int>());
                for (const auto& jp : js.at("periods")) {
                    RatePeriod p;
                    p.name = jp.at("name").get<std::string>();
                    for (const auto& r : jp.at("ranges")) {
                        const auto bounds = split(r.get<std::string>(), '-');
                        if (bounds.size() != 2)
                            throw ConfigError("tariff config: bad range '" +
                                              r.get<std::string>() + "'");
                        p.slots |= slots_in_range(bounds[0], bounds[1]);
                    }
                    if (jp.contains("energy_rate")) p.energy_rate = jp["energy_rate"].get<double>();
                    if (jp.contains("demand_rate")) p.demand_rate = jp["demand_rate"].get<double>();
                    season.periods.push_back(std::move(p));
                }
                t.seasons.push_back(std::move(season));
            }
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("tariff config: ") + e.what());
        }
        t.finalize();
        return t;
    }
};

// ---------------------------------------------------------------------------
// Billing.

// Per-month running state: for each demand period, the maximum 15-minute
// average power seen so far, plus accumulated energy charges. The maxima are
// non-decreasing day over day.
struct BillingState {
    Month month;
    std::map<std::string, double> ap_max_kw; // per demand-period name
    double energy_charges = 0.0;

    double max_for(const std::string& period) const {
        auto it = ap_max_kw.find(period);
        return it == ap_max_kw.end() ? 0.0 : it->second;
    }
};

inline double energy_charge(std::span<const double> ap, const Date& day,
                            const TariffSchedule& tariff) {
    if (ap.size() != static_cast<size_t>(kSlotsPerDay))
        throw DataError("aggregate profile must have 96 slots");
    const auto& season = tariff.season_of(day);
    double total = 0.0;
    for (int k = 0; k < kSlotsPerDay; ++k)
        total += ap[static_cast<size_t>(k)] * kSlotHours *
                 season.energy_rate_by_slot[static_cast<size_t>(k)];
    return total;
}

inline double period_peak_kw(std::span<const double> ap, const SlotSet& slots) {
    double peak = 0.0;
    for (int k = 0; k < kSlotsPerDay; ++k)
        if (slots.test(static_cast<size_t>(k)))
            peak = std::max(peak, ap[static_cast<size_t>(k)]);
    return peak;
}

// Folds one day's profile into the running demand maxima. Pure: returns the
// successor state.
inline BillingState update_demand_state(const BillingState& state, std::span<const double> ap,
                                        const Date& day, const TariffSchedule& tariff) {
    if (!state.month.contains(day))
        throw DataError("day " + day.to_string() + " not in billing month " +
                        state.month.to_string());
    BillingState next = state;
    for (const RatePeriod* p : tariff.season_of(day).demand_periods()) {
        const double peak = period_peak_kw(ap, p->slots);
        double& cur = next.ap_max_kw[p->name];
        cur = std::max(cur, peak);
    }
    return next;
}

struct BillBreakdown {
    double total = 0.0;
    double energy_total = 0.0;
    double demand_total = 0.0;
    std::map<std::string, double> demand_by_period;
};

// End-of-month demand charges: DC_h = AP_max_h * DR_h per period.
inline BillBreakdown demand_charge(const BillingState& end_of_month,
                                   const TariffSchedule& tariff) {
    BillBreakdown out;
    const auto& season = tariff.season_of_month(end_of_month.month.month);
    for (const RatePeriod* p : season.demand_periods()) {
        const double dc = end_of_month.max_for(p->name) * *p->demand_rate;
        out.demand_by_period[p->name] = dc;
        out.demand_total += dc;
    }
    out.total = out.demand_total;
    return out;
}

// Full-month bill for one aggregate profile per day (in calendar order).
inline BillBreakdown monthly_bill(std::span<const std::array<double, kSlotsPerDay>> daily_aps,
                                  const Month& month, const TariffSchedule& tariff) {
    if (daily_aps.size() != static_cast<size_t>(month.n_days()))
        throw DataError("monthly_bill: got " + std::to_string(daily_aps.size()) +
                        " profiles for " + std::to_string(month.n_days()) + "-day month " +
                        month.to_string());
    BillingState state;
    state.month = month;
    double energy = 0.0;
    for (int d = 1; d <= month.n_days(); ++d) {
        const auto& ap = daily_aps[static_cast<size_t>(d - 1)];
        const Date day = month.day(d);
        energy += energy_charge(ap, day, tariff);
        state = update_demand_state(state, ap, day, tariff);
    }
    state.energy_charges = energy;
    BillBreakdown out = demand_charge(state, tariff);
    out.energy_total = energy;
    out.total = out.demand_total + out.energy_total;
    return out;
}

} // namespace evsched
