#include "fc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fc/hadamard.hpp"
#include "fc/parallel.hpp"
#include "fc/rng.hpp"

namespace fc {

const char* scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::OneHot: return "one-hot";
        case Scheme::PseudoRandom: return "pseudo-random";
        case Scheme::PositiveHadamard: return "positive-hadamard";
        case Scheme::SignedHadamard: return "hadamard-design1";
        case Scheme::Design2: return "hadamard-design2";
    }
    throw std::invalid_argument("Unknown scheme.");
}

Scheme scheme_from_name(const std::string& name) {
    for (Scheme s : {Scheme::OneHot, Scheme::PseudoRandom, Scheme::PositiveHadamard,
                     Scheme::SignedHadamard, Scheme::Design2})
        if (name == scheme_name(s)) return s;
    throw std::invalid_argument("Unknown scheme name: " + name);
}

namespace {

Eigen::MatrixXd from_code(const ExposureCode& code) {
    Eigen::MatrixXd a(code.num_rows, code.length);
    for (int r = 0; r < code.num_rows; ++r)
        for (int c = 0; c < code.length; ++c) a(r, c) = code.at(r, c);
    return a;
}

}  // namespace

Eigen::MatrixXd sensing_matrix(Scheme scheme, int m, std::optional<uint64_t> seed) {
    if (m < 1) throw std::invalid_argument("Order exponent must be >= 1.");
    switch (scheme) {
        case Scheme::OneHot:
            return from_code(make_code(CodeKind::OneHot, m));
        case Scheme::PseudoRandom:
            if (!seed)
                throw std::invalid_argument("Pseudo-random sensing matrix requires a seed.");
            return from_code(make_code(CodeKind::PseudoRandom, m, *seed));
        case Scheme::PositiveHadamard:
            return from_code(make_code(CodeKind::PositiveHadamard, m));
        case Scheme::SignedHadamard:
            return from_code(make_code(CodeKind::SignedHadamard, m));
        case Scheme::Design2: {
            // Per deployed code the pixel pair measures, after normalizing
            // each camera by its throughput,
            //   DC = h(0)            -> row (1, 0)
            //   AC = (h(0)+h(u))/2   -> row (1/2, 1/2)
            // acting on (h(0), h(u)); the codes decouple, so the stacked
            // system is block diagonal with one 2x2 block per code.
            const int blocks = (1 << m) - 1;
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * blocks, 2 * blocks);
            for (int b = 0; b < blocks; ++b) {
                a(2 * b, 2 * b) = 1.0;
                a(2 * b + 1, 2 * b) = 0.5;
                a(2 * b + 1, 2 * b + 1) = 0.5;
            }
            return a;
        }
    }
    throw std::invalid_argument("Unknown scheme.");
}

double condition_number(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() == 0 || matrix.cols() == 0)
        throw std::invalid_argument("Condition number needs a nonempty matrix.");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    if (smax == 0.0) throw std::invalid_argument("Condition number needs a nonzero matrix.");
    const double smin = sv(sv.size() - 1);
    const double tol = std::max(matrix.rows(), matrix.cols()) *
                       std::numeric_limits<double>::epsilon() * smax;
    if (smin <= tol) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

ConditionSurvey random_condition_survey(int m, int trials, uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("Survey needs at least one trial.");
    std::vector<double> conds(trials);
    parallel_for(0, trials, [&](int64_t i) {
        const auto code = make_code(CodeKind::PseudoRandom, m, hash_mix(seed, i));
        conds[i] = condition_number(from_code(code));
    });
    std::sort(conds.begin(), conds.end());  // +inf sorts after every finite value
    ConditionSurvey out;
    out.trials = trials;
    out.median = conds[(trials - 1) / 2];
    out.fraction_singular =
        static_cast<double>(std::count(conds.begin(), conds.end(),
                                       std::numeric_limits<double>::infinity())) /
        trials;
    return out;
}

double light_efficiency(Scheme scheme, int m, double split) {
    if (m < 1) throw std::invalid_argument("Order exponent must be >= 1.");
    if (!(split > 0.0 && split < 1.0))
        throw std::invalid_argument("Beamsplitter split must lie strictly inside (0, 1).");
    // Every deployed code row (u >= 1) of each kind has a fixed density:
    // one active slot for OneHot, exactly half for PseudoRandom by
    // construction and for PositiveHadamard because the Hadamard rows
    // beyond the first are balanced.
    switch (scheme) {
        case Scheme::OneHot: return 1.0 / (1 << m);
        case Scheme::PseudoRandom: return 0.5;
        case Scheme::PositiveHadamard: return 0.5;
        case Scheme::SignedHadamard: return 1.0;  // complementary cameras
        case Scheme::Design2: return split + (1.0 - split) * 0.5;
    }
    throw std::invalid_argument("Unknown scheme.");
}

SensingMatrixReport analyze_scheme(Scheme scheme, int m, uint64_t seed, int survey_trials) {
    SensingMatrixReport rep;
    rep.scheme = scheme;
    rep.name = scheme_name(scheme);
    rep.efficiency = light_efficiency(scheme, m);
    if (scheme == Scheme::PseudoRandom && survey_trials > 0) {
        const auto survey = random_condition_survey(m, survey_trials, seed);
        rep.rows = rep.cols = 1 << m;
        rep.condition = survey.median;
        rep.sample_count = survey.trials;
        rep.fraction_singular = survey.fraction_singular;
        rep.note = "median over random codes";
        return rep;
    }
    const auto a = sensing_matrix(scheme, m,
                                  scheme == Scheme::PseudoRandom
                                      ? std::optional<uint64_t>(seed)
                                      : std::nullopt);
    rep.rows = static_cast<int>(a.rows());
    rep.cols = static_cast<int>(a.cols());
    rep.condition = condition_number(a);
    if (scheme == Scheme::Design2)
        rep.note = "block-diagonal normalized (DC, AC) pair per deployed code";
    return rep;
}

}  // namespace fc
