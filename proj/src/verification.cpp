#include "biomeval/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "biomeval/error.hpp"

namespace biomeval {

namespace {

std::vector<double> sorted_descending(std::span<const double> scores, const char* which) {
    if (scores.empty()) raise(ErrorCode::EmptyScoreSet, std::string(which) + " scores are empty");
    std::vector<double> sorted(scores.begin(), scores.end());
    for (const double s : sorted)
        if (!(s >= -1.0 && s <= 1.0))
            raise(ErrorCode::OutOfRange,
                  std::string(which) + " score " + std::to_string(s) + " outside [-1, 1]");
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return sorted;
}

} // namespace

RocCurve compute_roc(std::span<const double> genuine, std::span<const double> impostor) {
    const auto gen = sorted_descending(genuine, "genuine");
    const auto imp = sorted_descending(impostor, "impostor");

    // Candidate thresholds: sentinel above the maximum, then every distinct
    // observed score, descending.
    std::vector<double> thresholds;
    thresholds.reserve(gen.size() + imp.size() + 1);
    thresholds.push_back(std::max(gen.front(), imp.front()) + 1.0);
    {
        std::size_t gi = 0, ii = 0;
        double last = thresholds.front();
        while (gi < gen.size() || ii < imp.size()) {
            double next;
            if (gi < gen.size() && (ii >= imp.size() || gen[gi] >= imp[ii]))
                next = gen[gi++];
            else
                next = imp[ii++];
            if (next != last) {
                thresholds.push_back(next);
                last = next;
            }
        }
    }

    RocCurve roc;
    roc.thresholds = thresholds;
    roc.tpr.reserve(thresholds.size());
    roc.fpr.reserve(thresholds.size());
    roc.frr.reserve(thresholds.size());
    const double n_gen = static_cast<double>(gen.size());
    const double n_imp = static_cast<double>(imp.size());
    std::size_t gi = 0, ii = 0;
    for (const double threshold : thresholds) {
        while (gi < gen.size() && gen[gi] >= threshold) ++gi;
        while (ii < imp.size() && imp[ii] >= threshold) ++ii;
        const double tpr = static_cast<double>(gi) / n_gen;
        const double fpr = static_cast<double>(ii) / n_imp;
        roc.tpr.push_back(tpr);
        roc.fpr.push_back(fpr + kRocEpsilon);
        roc.frr.push_back((1.0 - tpr) + kRocEpsilon);
    }
    return roc;
}

EerResult compute_eer(const RocCurve& roc) {
    const std::size_t n = roc.thresholds.size();
    if (n == 0 || roc.tpr.size() != n || roc.fpr.size() != n || roc.frr.size() != n)
        raise(ErrorCode::Internal, "malformed ROC curve");

    // Realized curve point minimizing |FAR - FRR|; on ties the later entry
    // wins, which is the lower threshold since thresholds descend.
    std::size_t best = 0;
    double best_diff = std::fabs(roc.fpr[0] - roc.frr[0]);
    for (std::size_t i = 1; i < n; ++i) {
        const double diff = std::fabs(roc.fpr[i] - roc.frr[i]);
        if (diff <= best_diff) {
            best_diff = diff;
            best = i;
        }
    }

    EerResult result;
    result.threshold = roc.thresholds[best];
    result.tpr_at_eer = roc.tpr[best];
    result.far_at_eer = roc.fpr[best];
    result.frr_at_eer = roc.frr[best];
    result.eer = (result.far_at_eer + result.frr_at_eer) / 2.0;
    return result;
}

VerificationReport verification_report(const ScoreDistribution& mated,
                                       const ScoreDistribution& non_mated) {
    const auto genuine = project_axis(mated, ScoreAxis::Raw);
    const auto impostor = project_axis(non_mated, ScoreAxis::Raw);
    VerificationReport report;
    report.roc = compute_roc(genuine, impostor);
    report.eer = compute_eer(report.roc);
    return report;
}

void write_roc_csv(std::ostream& out, const RocCurve& roc) {
    out << "threshold,tpr,fpr,frr\n";
    char buf[64];
    for (std::size_t i = 0; i < roc.thresholds.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", roc.thresholds[i]);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", roc.tpr[i]);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", roc.fpr[i]);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", roc.frr[i]);
        out << buf << '\n';
    }
}

} // namespace biomeval
