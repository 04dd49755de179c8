#include "flexsched/flexoffer.hpp"

#include <algorithm>

#include "flexsched/common.hpp"

namespace flexsched {

const ForecastDistribution& ProbabilisticFlexOffer::conditional_at(int t_es) const {
    for (const auto& [t, dist] : t_le_conditional) {
        if (t == t_es) return dist;
    }
    raise(ErrorCode::internal_error,
          "no conditional distribution for t_es=" + std::to_string(t_es));
}

std::vector<ProfileSlice> profile_from_signature(const DeviceSignature& sig) {
    std::vector<ProfileSlice> profile;
    profile.reserve(sig.per_hour_demand.size());
    for (double e : sig.per_hour_demand) {
        if (e <= 0.0) {
            raise(ErrorCode::domain_error, "signature demand must be > 0");
        }
        profile.push_back({e, e});
    }
    return profile;
}

FlexOffer make_flexoffer(int t_es, int t_le, const DeviceSignature& sig) {
    const int k = sig.length();
    if (k < 1) {
        raise(ErrorCode::domain_error, "empty device signature");
    }
    if (t_le - t_es < k) {
        raise(ErrorCode::infeasible,
              "window [" + std::to_string(t_es) + "," + std::to_string(t_le) +
                  "] cannot fit a " + std::to_string(k) + "-hour operation");
    }
    FlexOffer offer;
    offer.t_es = t_es;
    offer.t_ls = t_le - k;
    offer.profile = profile_from_signature(sig);
    return offer;
}

ProbabilisticFlexOffer make_probabilistic_flexoffer(const ActivityForecast& forecast,
                                                    const DeviceSignature& sig) {
    ProbabilisticFlexOffer pfo;
    pfo.t_es_dist = forecast.t_es_dist;
    pfo.t_le_conditional = forecast.t_le_conditional;
    pfo.profile = profile_from_signature(sig);
    return pfo;
}

std::vector<FlexInterval> enumerate_intervals(const ProbabilisticFlexOffer& pfo) {
    const int len = pfo.duration();
    std::vector<FlexInterval> intervals;
    for (std::size_t i = 0; i < pfo.t_es_dist.support.size(); ++i) {
        const int t_es = pfo.t_es_dist.support[i];
        const double p_es = pfo.t_es_dist.pmf[i];
        const ForecastDistribution& cond = pfo.conditional_at(t_es);
        for (std::size_t j = 0; j < cond.support.size(); ++j) {
            const int t_le = cond.support[j];
            if (t_le - t_es < len) continue;  // dropped, not renormalized
            const double p = p_es * cond.pmf[j];
            if (p <= 0.0) continue;
            intervals.push_back({t_es, t_le - len, p});
        }
    }
    std::sort(intervals.begin(), intervals.end(), [](const FlexInterval& a, const FlexInterval& b) {
        if (a.t_es != b.t_es) return a.t_es < b.t_es;
        return a.t_ls < b.t_ls;
    });
    return intervals;
}

FlexOffer collapse_to_standard(const ProbabilisticFlexOffer& pfo) {
    const int t_es = pfo.t_es_dist.mode();
    const int t_le = pfo.conditional_at(t_es).mode();
    DeviceSignature sig;
    for (const ProfileSlice& s : pfo.profile) {
        sig.per_hour_demand.push_back(s.e_max);
    }
    return make_flexoffer(t_es, t_le, sig);
}

}  // namespace flexsched
