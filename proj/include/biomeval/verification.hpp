#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "biomeval/stats.hpp"

namespace biomeval {

// Stability constant added to the FPR and FRR series of every ROC curve.
inline constexpr double kRocEpsilon = 1e-10;

// Empirical ROC over the distinct observed scores (descending) plus a
// sentinel above the maximum. At threshold t, a pair is accepted when its
// score >= t; tpr is the accepted fraction of genuine scores and fpr the
// accepted fraction of impostor scores. fpr and frr carry +kRocEpsilon.
struct RocCurve {
    std::vector<double> thresholds; // strictly descending
    std::vector<double> tpr;
    std::vector<double> fpr; // = FAR + epsilon
    std::vector<double> frr; // = 1 - TPR + epsilon
    double epsilon = kRocEpsilon;
};

struct EerResult {
    double eer = 0.0; // midpoint of FAR and FRR at the chosen threshold
    double threshold = 0.0;
    double tpr_at_eer = 0.0;
    double far_at_eer = 0.0;
    double frr_at_eer = 0.0;
};

// Scores must be non-empty and lie in [-1, 1].
RocCurve compute_roc(std::span<const double> genuine, std::span<const double> impostor);

// Picks the realized curve point minimizing |FAR - FRR| (no interpolation),
// ties broken toward the lower threshold. eer is the FAR/FRR midpoint there,
// which inherits the +epsilon bias of the stored series (at most 1e-10).
EerResult compute_eer(const RocCurve& roc);

struct VerificationReport {
    EerResult eer;
    RocCurve roc;
};

// Mated scores act as genuine, non-mated as impostor; raw axis. The
// standardized axis gives identical results since the map is monotone.
VerificationReport verification_report(const ScoreDistribution& mated,
                                       const ScoreDistribution& non_mated);

// Plot-ready CSV: threshold, tpr, fpr, frr.
void write_roc_csv(std::ostream& out, const RocCurve& roc);

} // namespace biomeval
