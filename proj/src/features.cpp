#include "churnforge/features.hpp"

#include <algorithm>

#include "churnforge/errors.hpp"

namespace churnforge {

const std::array<std::string, kNumFeatures>& feature_names() {
  static const std::array<std::string, kNumFeatures> names = {
      "age_days",
      "cumulative_playtime_h",
      "playtime_7d",
      "playtime_30d",
      "sessions_7d",
      "sessions_30d",
      "mean_session_gap_30d",
      "days_since_last_session",
      "level",
      "levelups_30d",
      "cumulative_spend",
      "spend_30d",
      "purchases_30d",
      "days_since_last_purchase",
      "purchase_count_total",
      "actions_per_day_30d",
  };
  return names;
}

std::size_t feature_index(const std::string& name) {
  const auto& names = feature_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DomainError("unknown feature: " + name);
  return static_cast<std::size_t>(it - names.begin());
}

std::array<double, kNumFeatures> build_features(const PlayerTimeline& timeline,
                                                Date as_of) {
  if (as_of < timeline.first_login) {
    throw DomainError("feature snapshot before first login");
  }
  const double age_days = static_cast<double>(as_of - timeline.first_login);

  double playtime_total = 0, playtime_7 = 0, playtime_30 = 0;
  double sessions_7 = 0, sessions_30 = 0;
  double levelups_30 = 0, purchases_30 = 0;
  std::int64_t spend_total = 0, spend_30 = 0;
  double purchases_total = 0;
  int level = 0;
  Date last_session = -1, last_purchase = -1;
  std::vector<Date> session_days_30;

  for (const auto& r : timeline.records) {
    if (r.date > as_of) break;
    const int back = as_of - r.date;  // 0 = snapshot day
    playtime_total += r.playtime_s;
    spend_total += r.spend_cents;
    purchases_total += r.purchases;
    level = r.level;
    if (back < 7) {
      playtime_7 += r.playtime_s;
      sessions_7 += r.sessions;
    }
    if (back < 30) {
      playtime_30 += r.playtime_s;
      sessions_30 += r.sessions;
      levelups_30 += r.levelups;
      purchases_30 += r.purchases;
      spend_30 += r.spend_cents;
      if (r.sessions > 0) session_days_30.push_back(r.date);
    }
    if (r.sessions > 0) last_session = r.date;
    if (r.purchases > 0) last_purchase = r.date;
  }

  double mean_gap = 30.0;  // window length when fewer than 2 session days
  if (session_days_30.size() >= 2) {
    double sum = 0;
    for (std::size_t i = 1; i < session_days_30.size(); ++i) {
      sum += session_days_30[i] - session_days_30[i - 1];
    }
    mean_gap = sum / static_cast<double>(session_days_30.size() - 1);
  }

  const double days_since_session =
      last_session < 0 ? age_days
                       : std::min(age_days, static_cast<double>(as_of -
                                                                last_session));
  const double days_since_purchase =
      last_purchase < 0 ? age_days
                        : std::min(age_days, static_cast<double>(
                                                 as_of - last_purchase));

  return {
      age_days,
      playtime_total / 3600.0,
      playtime_7 / 3600.0,
      playtime_30 / 3600.0,
      sessions_7,
      sessions_30,
      mean_gap,
      days_since_session,
      static_cast<double>(level),
      levelups_30,
      static_cast<double>(spend_total) / 100.0,
      static_cast<double>(spend_30) / 100.0,
      purchases_30,
      days_since_purchase,
      purchases_total,
      (sessions_30 + levelups_30 + purchases_30) / 30.0,
  };
}

}  // namespace churnforge
