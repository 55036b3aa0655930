#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace fc {

// Multiplexing schemes whose per-pixel sensing matrices are compared by
// condition number and light throughput.
enum class Scheme { OneHot, PseudoRandom, PositiveHadamard, SignedHadamard, Design2 };

const char* scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);

// Per-pixel sensing matrix mapping the unknowns to the raw measurements.
//   OneHot           identity (each code reads one time slot)
//   PseudoRandom     square binary matrix, each row exactly half active
//   PositiveHadamard (H + J)/2, the binary positive part
//   SignedHadamard   H itself (two-camera difference realizes signed rows)
//   Design2          block-diagonal over the 2^m - 1 deployed codes of the
//                    throughput-normalized pair [DC; AC] = [[1,0],[1/2,1/2]]
//                    acting on (h(0), h(u)); its condition number is the
//                    squared golden ratio independent of m
// seed is required for PseudoRandom and ignored elsewhere.
Eigen::MatrixXd sensing_matrix(Scheme scheme, int m,
                               std::optional<uint64_t> seed = std::nullopt);

// sigma_max / sigma_min; +infinity when the matrix is numerically rank
// deficient (sigma_min below the SVD rank threshold).  Throws on an all-zero
// matrix.
double condition_number(const Eigen::MatrixXd& matrix);

struct ConditionSurvey {
    double median = 0.0;            // lower median; infinite draws sort last
    double fraction_singular = 0.0;
    int trials = 0;
};

// Condition-number statistics over `trials` random binary codes.  Trial i
// uses the derived seed hash_mix(seed, i), so the result is independent of
// scheduling and thread count.
ConditionSurvey random_condition_survey(int m, int trials, uint64_t seed);

// Fraction of scene photons reaching a sensor under the deployed codes
// u = 1..2^m-1.  Design2 splits the beam: split to the DC camera plus the
// coded half of the remainder.
double light_efficiency(Scheme scheme, int m, double split = 0.5);

struct SensingMatrixReport {
    Scheme scheme = Scheme::OneHot;
    std::string name;
    int rows = 0;
    int cols = 0;
    double condition = 0.0;  // sampled median when sample_count > 0
    double efficiency = 0.0;
    int sample_count = 0;
    double fraction_singular = 0.0;
    std::string note;  // construction remarks carried into reports
};

// One Table-style report row.  PseudoRandom reports the survey median when
// survey_trials > 0, otherwise the single seeded instance.
SensingMatrixReport analyze_scheme(Scheme scheme, int m, uint64_t seed = 0,
                                   int survey_trials = 0);

}  // namespace fc
