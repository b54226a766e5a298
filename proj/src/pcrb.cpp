#include "radioslam/pcrb.hpp"

#include "radioslam/errors.hpp"
#include "radioslam/geometry.hpp"
#include "radioslam/jacobians.hpp"

#include <iomanip>
#include <limits>
#include <ostream>

namespace radioslam {

namespace {

bool is_positive_definite(const Mat& m) {
    if (!m.isApprox(m.transpose(), 1e-12)) return false;
    Eigen::LLT<Mat> llt(m);
    return llt.info() == Eigen::Success;
}

bool path_detected(const std::vector<bool>& detected, std::size_t path) {
    return detected.empty() || (path < detected.size() && detected[path]);
}

}  // namespace

Mat spd_inverse(const Mat& m, double max_condition) {
    const Mat sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(sym, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > max_condition)
        throw NumericalFailure("matrix is not safely invertible (condition guard)");
    Eigen::LLT<Mat> llt(sym);
    if (llt.info() != Eigen::Success) throw NumericalFailure("Cholesky factorization failed");
    Mat inv = llt.solve(Mat::Identity(sym.rows(), sym.cols()));
    return 0.5 * (inv + inv.transpose());
}

JointInfoMatrix pim_init(const Mat4& ue_prior_cov, const Mat3& lm_prior_cov, int num_landmarks) {
    if (num_landmarks < 0) throw SingularPrior("negative landmark count");
    if (!is_positive_definite(ue_prior_cov)) throw SingularPrior("UE prior covariance is not PD");
    if (num_landmarks > 0 && !is_positive_definite(lm_prior_cov))
        throw SingularPrior("landmark prior covariance is not PD");
    const int n = 4 + 3 * num_landmarks;
    JointInfoMatrix j{Mat::Zero(n, n)};
    j.info.topLeftCorner<4, 4>() = Mat(ue_prior_cov).inverse();
    const Mat3 lm_info = lm_prior_cov.inverse();
    for (int i = 0; i < num_landmarks; ++i)
        j.info.block<3, 3>(JointInfoMatrix::landmark_offset(i), JointInfoMatrix::landmark_offset(i)) = lm_info;
    j.info = 0.5 * (j.info + j.info.transpose());
    return j;
}

Mat data_information(const UEState& true_ue, const Scenario& scenario, double speed,
                     const SensorConfig& sensor, const std::vector<bool>& detected) {
    const int num_lm = static_cast<int>(scenario.landmarks.size());
    const int n = 4 + 3 * num_lm;
    const int dz = sensor.meas_dim();
    const Mat r_inv = sensor.noise().inverse();
    const Vec3& bs = scenario.bs.position;

    Mat info = Mat::Zero(n, n);
    if (path_detected(detected, 0)) {
        const Mat a = meas_jacobian_ue(scenario.bs, bs, true_ue, speed).topRows(dz);
        info.topLeftCorner<4, 4>() += a.transpose() * r_inv * a;
    }
    for (int i = 0; i < num_lm; ++i) {
        if (!path_detected(detected, static_cast<std::size_t>(i) + 1)) continue;
        const MeasJacobians jac = meas_jacobians(scenario.landmarks[static_cast<std::size_t>(i)], bs, true_ue, speed);
        Mat h = Mat::Zero(dz, n);
        h.leftCols<4>() = jac.ue.topRows(dz);
        h.middleCols<3>(JointInfoMatrix::landmark_offset(i)) = jac.lm.topRows(dz);
        info += h.transpose() * r_inv * h;
    }
    return 0.5 * (info + info.transpose());
}

JointInfoMatrix pim_step(const JointInfoMatrix& prev, const UEState& prev_ue,
                         const UEState& true_ue, const Scenario& scenario,
                         const MotionConfig& motion, const SensorConfig& sensor,
                         const std::vector<bool>& detected) {
    const auto n = prev.info.rows();
    if (n != 4 + 3 * static_cast<Eigen::Index>(scenario.landmarks.size()))
        throw NumericalFailure("information matrix size does not match the scenario");

    Mat f = Mat::Identity(n, n);
    f.topLeftCorner<4, 4>() = transition_jacobian(prev_ue, motion);
    Mat q = Mat::Zero(n, n);
    q.topLeftCorner<4, 4>() = motion.process_noise;

    const Mat predicted_cov = q + f * spd_inverse(prev.info) * f.transpose();
    JointInfoMatrix next;
    next.info = data_information(true_ue, scenario, motion.speed, sensor, detected) +
                spd_inverse(predicted_cov);
    next.info = 0.5 * (next.info + next.info.transpose());
    return next;
}

BoundsReport extract_bounds(const JointInfoMatrix& j) {
    const Mat cov = spd_inverse(j.info);
    BoundsReport b;
    b.peb = std::sqrt(cov(0, 0) + cov(1, 1));
    b.heb = std::sqrt(cov(2, 2));
    b.ceb = std::sqrt(cov(3, 3));
    const int num_lm = j.num_landmarks();
    double sum = 0.0;
    for (int i = 0; i < num_lm; ++i) {
        const int o = JointInfoMatrix::landmark_offset(i);
        const double leb = std::sqrt(cov(o, o) + cov(o + 1, o + 1) + cov(o + 2, o + 2));
        b.leb.push_back(leb);
        sum += leb;
    }
    b.leb_avg = num_lm > 0 ? sum / num_lm : 0.0;
    return b;
}

DopplerDecomposition doppler_decomposition(const UEState& true_ue, const Scenario& scenario,
                                           double speed, const SensorConfig& sensor) {
    const Mat6 r = sensor.full_noise();
    const Mat r5_inv = Mat(r.topLeftCorner<5, 5>()).inverse();
    const double w_d = 1.0 / r(5, 5);
    const Vec3& bs = scenario.bs.position;

    DopplerDecomposition out;
    auto add_ue = [&](const MeasJacobianUE& a) {
        const Mat a5 = a.topRows<5>();
        const Vec4 ad = a.row(5).transpose();
        out.ue_non_doppler += a5.transpose() * r5_inv * a5;
        const Mat4 term = w_d * ad * ad.transpose();
        out.ue_doppler += term;
        out.ue_doppler_per_path.push_back(term);
    };
    add_ue(meas_jacobian_ue(scenario.bs, bs, true_ue, speed));
    for (const auto& lm : scenario.landmarks) {
        const MeasJacobians jac = meas_jacobians(lm, bs, true_ue, speed);
        add_ue(jac.ue);
        const Mat b5 = jac.lm.topRows<5>();
        const Vec3 bd = jac.lm.row(5).transpose();
        out.lm_non_doppler.push_back(b5.transpose() * r5_inv * b5);
        out.lm_doppler.push_back(w_d * bd * bd.transpose());
    }
    return out;
}

BoundsReport BoundsSeries::aggregate(Aggregation how) const {
    if (steps.empty()) throw NumericalFailure("empty bounds series");
    if (how == Aggregation::Final) return steps.back();
    BoundsReport mean;
    mean.leb.assign(steps.front().leb.size(), 0.0);
    for (const auto& s : steps) {
        mean.peb += s.peb;
        mean.heb += s.heb;
        mean.ceb += s.ceb;
        mean.leb_avg += s.leb_avg;
        for (std::size_t i = 0; i < s.leb.size(); ++i) mean.leb[i] += s.leb[i];
    }
    const double n = static_cast<double>(steps.size());
    mean.peb /= n;
    mean.heb /= n;
    mean.ceb /= n;
    mean.leb_avg /= n;
    for (double& l : mean.leb) l /= n;
    return mean;
}

BoundsSeries run_bounds(const BoundsSetup& setup, bool with_doppler, double sigma_d) {
    SensorConfig sensor = setup.sensor;
    sensor.with_doppler = with_doppler;
    sensor.sigma_d = sigma_d;

    const auto truth = simulate_trajectory(setup.init, setup.motion, setup.steps, false, 0);
    JointInfoMatrix j = pim_init(setup.ue_prior_cov, setup.lm_prior_cov,
                                 static_cast<int>(setup.scenario.landmarks.size()));
    BoundsSeries series{sigma_d, with_doppler, {}};
    UEState prev = setup.init;
    for (const UEState& s : truth) {
        j = pim_step(j, prev, s, setup.scenario, setup.motion, sensor);
        series.steps.push_back(extract_bounds(j));
        prev = s;
    }
    return series;
}

std::vector<BoundsSeries> sweep_sigma_d(const BoundsSetup& setup, const std::vector<double>& grid) {
    if (grid.empty()) throw ConfigError("sigma_d grid is empty");
    std::vector<BoundsSeries> table;
    for (double sd : grid) {
        if (!(sd > 0.0)) throw ConfigError("sigma_d values must be positive");
        table.push_back(run_bounds(setup, true, sd));
    }
    BoundsSeries baseline = run_bounds(setup, false, setup.sensor.sigma_d);
    baseline.sigma_d = std::numeric_limits<double>::quiet_NaN();
    table.push_back(std::move(baseline));
    return table;
}

void write_bounds_csv(std::ostream& os, const std::vector<BoundsSeries>& table) {
    std::size_t num_lm = 0;
    if (!table.empty() && !table.front().steps.empty()) num_lm = table.front().steps.front().leb.size();
    os << "sigma_d,doppler_enabled,k,PEB_m,HEB_rad,HEB_deg,CEB_m,LEB_avg_m";
    for (std::size_t i = 0; i < num_lm; ++i) os << ",LEB_" << (i + 1) << "_m";
    os << '\n';
    os << std::setprecision(15);
    // Interleave rows by step so each k block holds every sigma_d plus the baseline.
    const std::size_t steps = table.empty() ? 0 : table.front().steps.size();
    for (std::size_t k = 0; k < steps; ++k) {
        for (const auto& series : table) {
            const BoundsReport& b = series.steps[k];
            if (std::isnan(series.sigma_d)) os << "nan"; else os << series.sigma_d;
            os << ',' << (series.doppler_enabled ? 1 : 0) << ',' << (k + 1) << ',' << b.peb << ','
               << b.heb << ',' << b.heb_deg() << ',' << b.ceb << ',' << b.leb_avg;
            for (double l : b.leb) os << ',' << l;
            os << '\n';
        }
    }
}

}  // namespace radioslam
