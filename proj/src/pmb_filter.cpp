#include "radioslam/pmb_filter.hpp"

#include "radioslam/errors.hpp"
#include "radioslam/geometry.hpp"
#include "radioslam/jacobians.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>

namespace radioslam {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Floor for log(birth-or-clutter likelihood) so that costs stay finite when
// neither clutter nor births can explain a measurement.
constexpr double kMinLogNew = -1e3;

double log_sum_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

struct GaussianEval {
    double log_likelihood = kNegInf;
    double mahalanobis2 = std::numeric_limits<double>::infinity();
};

GaussianEval log_gaussian(const Vec& nu, const Mat& s) {
    Eigen::LLT<Mat> llt(s);
    if (llt.info() != Eigen::Success) return {};
    const Vec w = llt.matrixL().solve(nu);
    const double m2 = w.squaredNorm();
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return {-0.5 * (m2 + logdet + static_cast<double>(nu.size()) * std::log(2.0 * kPi)), m2};
}

// Predicted measurement and Jacobians of one path at the current estimates.
struct PathModel {
    Vec zhat;
    Mat a;  // dz x 4
    Mat b;  // dz x 3 (zero for the BS)
};

std::optional<PathModel> path_model(const Landmark& lm, const Vec3& bs, const UEState& ue,
                                    double speed, int dz) {
    try {
        const Measurement z = measure(lm, bs, ue, speed, dz == 6);
        const MeasJacobians jac = meas_jacobians(lm, bs, ue, speed);
        return PathModel{z.vec(), jac.ue.topRows(dz), jac.lm.topRows(dz)};
    } catch (const DegenerateGeometry&) {
        return std::nullopt;
    }
}

// Per (row, measurement) evaluation for an existing Bernoulli.
struct PairEval {
    bool gated = false;
    double log_likelihood = kNegInf;      // log(r * p_D * sum_k pi_k N_k)
    std::array<double, 2> kind_log{kNegInf, kNegInf};  // log(pi_k N_k)
};

struct BirthCandidate {
    double log_likelihood = kNegInf;  // log(p_D * sum_k lambda_k * integral_k)
    std::array<double, 2> kind_log{kNegInf, kNegInf};
    std::array<GaussianDensity, 2> density;
};

struct Hypothesis {
    double weight = 0.0;
    GaussianDensity ue;
    std::vector<BernoulliComponent> existing;
    std::vector<char> measurement_used;
};

Vec measurement_vector(const Measurement& z, int dz) {
    if (dz == 6 && !z.doppler) throw ConfigError("filter expects Doppler but a measurement has none");
    return z.vec().head(dz);
}

GaussianDensity moment_match(const std::vector<std::pair<double, const GaussianDensity*>>& parts,
                             int wrap_index) {
    double total = 0.0;
    for (const auto& [w, g] : parts) total += w;
    const GaussianDensity& ref = *parts.front().second;
    GaussianDensity out{Vec::Zero(ref.mean.size()), Mat::Zero(ref.cov.rows(), ref.cov.cols())};
    if (!(total > 0.0)) return ref;
    auto offset = [&](const Vec& m) {
        Vec d = m - ref.mean;
        if (wrap_index >= 0) d(wrap_index) = wrap_angle(d(wrap_index));
        return d;
    };
    Vec mean_offset = Vec::Zero(ref.mean.size());
    for (const auto& [w, g] : parts) mean_offset += (w / total) * offset(g->mean);
    for (const auto& [w, g] : parts) {
        const Vec d = offset(g->mean) - mean_offset;
        out.cov += (w / total) * (g->cov + d * d.transpose());
    }
    out.mean = ref.mean + mean_offset;
    if (wrap_index >= 0) out.mean(wrap_index) = wrap_angle(out.mean(wrap_index));
    out.cov = repair_covariance(out.cov);
    return out;
}

}  // namespace

Mat repair_covariance(const Mat& cov) {
    Mat sym = 0.5 * (cov + cov.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
    const double lo = eig.eigenvalues().minCoeff();
    if (lo >= 0.0) return sym;
    const double tr = std::max(std::abs(sym.trace()), std::numeric_limits<double>::min());
    if (lo < -1e-6 * tr) throw NumericalFailure("covariance has a large negative eigenvalue");
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
           eig.eigenvectors().transpose();
}

void FilterConfig::validate() const {
    if (gamma < 1) throw ConfigError("gamma must be >= 1");
    if (!(prune_r >= 0.0 && prune_r < 1.0)) throw ConfigError("prune threshold must lie in [0, 1)");
    if (!(gate > 0.0)) throw ConfigError("gate must be positive");
    if (max_components < 1) throw ConfigError("component cap must be >= 1");
    if (!(kind_confidence >= 0.5 && kind_confidence <= 1.0))
        throw ConfigError("kind confidence must lie in [0.5, 1]");
    if (bs.kind != LandmarkKind::BS) throw ConfigError("filter BS must have kind BS");
    motion.validate();
    sensor.validate();
}

PMBBelief initial_belief(const UEState& mean, const Mat4& cov, const UndetectedIntensity& undetected) {
    PMBBelief b;
    b.ue = {mean.vec(), cov};
    b.undetected = undetected;
    return b;
}

PMBBelief predict(const PMBBelief& belief, const MotionConfig& motion) {
    PMBBelief out = belief;
    const UEState mean = UEState::from_vec(belief.ue.mean);
    const Mat4 f = transition_jacobian(mean, motion);
    out.ue.mean = propagate(mean, motion).vec();
    out.ue.cov = repair_covariance(f * belief.ue.cov * f.transpose() + motion.process_noise);
    return out;
}

UpdateResult update(const PMBBelief& belief, const std::vector<Measurement>& measurements,
                    const FilterConfig& cfg, std::span<const int> measurement_tags) {
    const int dz = cfg.sensor.meas_dim();
    const int m = static_cast<int>(measurements.size());
    const int n = static_cast<int>(belief.bernoullis.size());
    const int rows = n + 1;
    const double pd = cfg.sensor.detection_prob;
    const double speed = cfg.motion.speed;
    const Vec3& bs = cfg.bs.position;
    const Mat r = cfg.sensor.noise();
    const UEState ue_mean = UEState::from_vec(belief.ue.mean);
    const Mat& p_ue = belief.ue.cov;
    const double gate2 = cfg.gate * cfg.gate;
    const double log_pd = std::log(pd);
    if (!measurement_tags.empty() && static_cast<int>(measurement_tags.size()) != m)
        throw LengthMismatch("measurement tags must match the measurements");

    std::vector<Vec> z(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) z[j] = measurement_vector(measurements[j], dz);

    // Predicted paths: row 0 is the BS, rows 1..n the Bernoulli kinds.
    const std::optional<PathModel> bs_model = path_model(cfg.bs, bs, ue_mean, speed, dz);
    std::vector<std::array<std::optional<PathModel>, 2>> lm_models(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto& ber = belief.bernoullis[i];
        for (std::size_t k = 0; k < 2; ++k) {
            if (ber.kind_probs[k] <= 0.0) continue;
            const Landmark lm{ber.density[k].mean, kMapKinds[k]};
            lm_models[i][k] = path_model(lm, bs, ue_mean, speed, dz);
        }
    }

    // Birth-or-clutter likelihood per measurement.
    const double log_clutter =
        cfg.sensor.clutter_rate > 0.0 ? std::log(cfg.sensor.clutter_density()) : kNegInf;
    std::vector<BirthCandidate> births(static_cast<std::size_t>(m));
    std::vector<double> log_new(static_cast<std::size_t>(m), kNegInf);
    for (int j = 0; j < m; ++j) {
        BirthCandidate& bc = births[j];
        for (std::size_t k = 0; k < 2; ++k) {
            if (belief.undetected.expected_count[k] <= 0.0 || pd <= 0.0) continue;
            Vec3 x0;
            try {
                x0 = birth_position(measurements[j], ue_mean, bs, kMapKinds[k]);
            } catch (const InfeasibleBirth&) {
                continue;
            }
            if (!belief.undetected.contains(x0)) continue;
            const auto model = path_model({x0, kMapKinds[k]}, bs, ue_mean, speed, dz);
            if (!model) continue;
            const Mat s0 = r + model->a * p_ue * model->a.transpose();
            const Mat s0_inv = s0.inverse();
            const Mat info = model->b.transpose() * s0_inv * model->b;
            Eigen::LLT<Mat> info_llt(info);
            if (info_llt.info() != Eigen::Success) continue;
            const Mat cov = info_llt.solve(Mat::Identity(3, 3));
            const Vec y = innovation(z[j], model->zhat);
            const Vec shift = cov * model->b.transpose() * s0_inv * y;
            const GaussianEval g = log_gaussian(y, s0);
            if (g.log_likelihood == kNegInf) continue;
            // log of the integral over the landmark position of N(z; h(x), S0)
            const double log_det_cov = std::log(cov.determinant());
            const double log_integral = g.log_likelihood + 1.5 * std::log(2.0 * kPi) +
                                        0.5 * log_det_cov + 0.5 * shift.dot(info * shift);
            bc.kind_log[k] = log_pd + std::log(belief.undetected.density(k)) + log_integral;
            bc.density[k] = {x0 + shift, repair_covariance(cov)};
        }
        bc.log_likelihood = log_sum_exp(bc.kind_log[0], bc.kind_log[1]);
        log_new[j] = log_sum_exp(log_clutter, bc.log_likelihood);
    }

    // Pairwise association likelihoods.
    std::vector<std::vector<PairEval>> pairs(static_cast<std::size_t>(rows),
                                             std::vector<PairEval>(static_cast<std::size_t>(m)));
    for (int j = 0; j < m; ++j) {
        if (bs_model && pd > 0.0) {
            const Mat s = r + bs_model->a * p_ue * bs_model->a.transpose();
            const GaussianEval g = log_gaussian(innovation(z[j], bs_model->zhat), s);
            PairEval& pe = pairs[0][j];
            pe.gated = g.mahalanobis2 <= gate2;
            pe.log_likelihood = log_pd + g.log_likelihood;
        }
        for (int i = 0; i < n; ++i) {
            const auto& ber = belief.bernoullis[i];
            PairEval& pe = pairs[i + 1][j];
            if (pd <= 0.0 || ber.existence <= 0.0) continue;
            for (std::size_t k = 0; k < 2; ++k) {
                const auto& model = lm_models[i][k];
                if (!model) continue;
                const Mat s = r + model->a * p_ue * model->a.transpose() +
                              model->b * ber.density[k].cov * model->b.transpose();
                const GaussianEval g = log_gaussian(innovation(z[j], model->zhat), s);
                pe.kind_log[k] = std::log(ber.kind_probs[k]) + g.log_likelihood;
                pe.gated = pe.gated || g.mahalanobis2 <= gate2;
            }
            pe.log_likelihood = std::log(ber.existence) + log_pd + log_sum_exp(pe.kind_log[0], pe.kind_log[1]);
        }
    }

    // Cost matrix: rows x (measurements + one misdetection column per row).
    CostMatrix cost = CostMatrix::Constant(rows, m + rows, kForbidden);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < m; ++j) {
            const PairEval& pe = pairs[i][j];
            if (!pe.gated || pe.log_likelihood == kNegInf) continue;
            cost(i, j) = -(pe.log_likelihood - std::max(log_new[j], kMinLogNew));
        }
        const double miss = i == 0 ? 1.0 - pd : 1.0 - belief.bernoullis[i - 1].existence * pd;
        if (miss > 0.0) cost(i, m + i) = -std::log(miss);
    }

    std::vector<Assignment> das;
    try {
        das = kbest(cost, cfg.gamma);
    } catch (const Infeasible&) {
        throw NoFeasibleDA("no data association has non-zero likelihood");
    }

    UpdateResult result;
    result.num_measurements = m;
    result.row_tags.push_back(kBsTag);
    for (const auto& ber : belief.bernoullis) result.row_tags.push_back(ber.tag);

    const double best = das.front().cost;
    double norm = 0.0;
    for (const auto& da : das) norm += std::exp(-(da.cost - best));
    for (const auto& da : das) result.associations.push_back({da, std::exp(-(da.cost - best)) / norm});

    // Per-association joint update.
    std::vector<Hypothesis> hyps;
    hyps.reserve(das.size());
    for (const auto& wa : result.associations) {
        Hypothesis h;
        h.weight = wa.weight;
        h.existing = belief.bernoullis;
        h.measurement_used.assign(static_cast<std::size_t>(m), 0);

        struct Link {
            int row;
            int meas;
            std::size_t kind;  // dominant kind for the joint update
            bool joint;        // false: kind too uncertain to drive the UE
        };
        std::vector<Link> links;
        for (int i = 0; i < rows; ++i) {
            const int col = wa.assignment.row_to_col[static_cast<std::size_t>(i)];
            if (col >= 0 && col < m) {
                h.measurement_used[static_cast<std::size_t>(col)] = 1;
                std::size_t kind = 0;
                bool joint = true;
                if (i > 0) {
                    const auto& kl = pairs[i][col].kind_log;
                    kind = kl[1] > kl[0] ? 1 : 0;
                    joint = std::exp(kl[kind] - log_sum_exp(kl[0], kl[1])) >= cfg.kind_confidence;
                }
                links.push_back({i, col, kind, joint});
            } else if (i > 0) {
                auto& ber = h.existing[i - 1];
                const double rr = ber.existence;
                ber.existence = rr * (1.0 - pd) / (1.0 - rr * pd);
            }
        }

        // Stack UE plus every associated landmark (dominant kind).
        int num_lm = 0, num_joint = 0;
        for (const auto& l : links) {
            if (!l.joint) continue;
            ++num_joint;
            if (l.row > 0) ++num_lm;
        }
        const int nx = 4 + 3 * num_lm;
        const int nz = dz * num_joint;
        Vec x = Vec::Zero(nx);
        Mat p = Mat::Zero(nx, nx);
        x.head<4>() = belief.ue.mean;
        p.topLeftCorner<4, 4>() = p_ue;
        Mat hmat = Mat::Zero(nz, nx);
        Mat rmat = Mat::Zero(nz, nz);
        Vec nu = Vec::Zero(nz);
        int lm_slot = 0;
        std::vector<int> slot_of_link(links.size(), -1);
        int zr = -dz;
        for (std::size_t li = 0; li < links.size(); ++li) {
            const Link& l = links[li];
            if (!l.joint) continue;
            zr += dz;
            const PathModel* model = nullptr;
            if (l.row == 0) {
                model = &*bs_model;
            } else {
                model = &*lm_models[l.row - 1][l.kind];
                const int o = 4 + 3 * lm_slot;
                slot_of_link[li] = o;
                const auto& dens = belief.bernoullis[l.row - 1].density[l.kind];
                x.segment<3>(o) = dens.mean;
                p.block<3, 3>(o, o) = dens.cov;
                hmat.block(zr, o, dz, 3) = model->b;
                ++lm_slot;
            }
            hmat.block(zr, 0, dz, 4) = model->a;
            rmat.block(zr, zr, dz, dz) = r;
            nu.segment(zr, dz) = innovation(z[l.meas], model->zhat);
        }
        if (nz > 0) {
            const Mat s = hmat * p * hmat.transpose() + rmat;
            Eigen::LLT<Mat> s_llt(s);
            if (s_llt.info() != Eigen::Success) throw NumericalFailure("singular innovation covariance");
            const Mat gain = s_llt.solve(hmat * p).transpose();
            x += gain * nu;
            // Joseph form keeps the posterior symmetric PSD.
            const Mat ikh = Mat::Identity(nx, nx) - gain * hmat;
            p = repair_covariance(ikh * p * ikh.transpose() + gain * rmat * gain.transpose());
        }
        h.ue.mean = x.head<4>();
        h.ue.mean(2) = wrap_angle(h.ue.mean(2));
        h.ue.cov = p.topLeftCorner<4, 4>();

        for (std::size_t li = 0; li < links.size(); ++li) {
            const Link& l = links[li];
            if (l.row == 0) continue;
            const int bi = l.row - 1;
            auto& ber = h.existing[bi];
            const auto& prior = belief.bernoullis[bi];
            ber.existence = 1.0;

            // Kind posterior from the per-kind likelihoods.
            const auto& kl = pairs[l.row][l.meas].kind_log;
            const double tot = log_sum_exp(kl[0], kl[1]);
            for (std::size_t k = 0; k < 2; ++k) {
                double pk = kl[k] == kNegInf ? 0.0 : std::exp(kl[k] - tot);
                if (pk < cfg.min_kind_prob) pk = 0.0;
                ber.kind_probs[k] = pk;
            }
            const double ksum = ber.kind_probs[0] + ber.kind_probs[1];
            if (ksum > 0.0) {
                ber.kind_probs[0] /= ksum;
                ber.kind_probs[1] /= ksum;
            } else {
                ber.kind_probs = prior.kind_probs;
            }

            for (std::size_t k = 0; k < 2; ++k) {
                if (ber.kind_probs[k] <= 0.0) continue;
                if (k == l.kind && l.joint) {
                    const int o = slot_of_link[li];
                    ber.density[k] = {x.segment<3>(o), p.block<3, 3>(o, o)};
                    continue;
                }
                // Non-dominant (or uncertain) kind: landmark-only update
                // against the UE prior.
                const auto& model = lm_models[bi][k];
                if (!model) continue;
                const auto& dens = prior.density[k];
                const Mat s = r + model->a * p_ue * model->a.transpose() +
                              model->b * dens.cov * model->b.transpose();
                const Mat gain = dens.cov * model->b.transpose() * s.inverse();
                const Vec innov = innovation(z[l.meas], model->zhat);
                ber.density[k] = {dens.mean + gain * innov,
                                  repair_covariance(dens.cov - gain * model->b * dens.cov)};
            }
        }
        hyps.push_back(std::move(h));
    }

    // Reduction to a single PMB.
    PMBBelief& post = result.belief;
    post.undetected = belief.undetected;
    for (double& c : post.undetected.expected_count) c *= (1.0 - pd);
    post.hypotheses = {GlobalHypothesis{}};

    {
        std::vector<std::pair<double, const GaussianDensity*>> parts;
        for (const auto& h : hyps) parts.emplace_back(h.weight, &h.ue);
        post.ue = moment_match(parts, 2);
    }

    for (int i = 0; i < n; ++i) {
        BernoulliComponent merged = belief.bernoullis[i];
        double rsum = 0.0;
        std::array<double, 2> ksum{0.0, 0.0};
        for (const auto& h : hyps) {
            const auto& b = h.existing[i];
            rsum += h.weight * b.existence;
            for (std::size_t k = 0; k < 2; ++k) ksum[k] += h.weight * b.existence * b.kind_probs[k];
        }
        merged.existence = std::clamp(rsum, 0.0, 1.0);
        const double kt = ksum[0] + ksum[1];
        for (std::size_t k = 0; k < 2; ++k) {
            merged.kind_probs[k] = kt > 0.0 ? ksum[k] / kt : belief.bernoullis[i].kind_probs[k];
            std::vector<std::pair<double, const GaussianDensity*>> parts;
            for (const auto& h : hyps) {
                const auto& b = h.existing[i];
                const double w = h.weight * b.existence * b.kind_probs[k];
                if (w > 0.0) parts.emplace_back(w, &b.density[k]);
            }
            if (!parts.empty()) merged.density[k] = moment_match(parts, -1);
        }
        post.bernoullis.push_back(std::move(merged));
    }

    for (int j = 0; j < m; ++j) {
        const BirthCandidate& bc = births[j];
        if (bc.log_likelihood == kNegInf) continue;
        double unused = 0.0;
        for (const auto& h : hyps) if (!h.measurement_used[j]) unused += h.weight;
        const double r_new = std::exp(bc.log_likelihood - log_new[j]);
        BernoulliComponent ber;
        ber.existence = std::clamp(unused * r_new, 0.0, 1.0);
        if (ber.existence < cfg.prune_r) continue;
        for (std::size_t k = 0; k < 2; ++k) {
            const double pk = bc.kind_log[k] == kNegInf ? 0.0 : std::exp(bc.kind_log[k] - bc.log_likelihood);
            ber.kind_probs[k] = pk;
            ber.density[k] = bc.kind_log[k] == kNegInf ? bc.density[1 - k] : bc.density[k];
        }
        ber.tag = measurement_tags.empty() ? -1 : measurement_tags[j];
        post.bernoullis.push_back(std::move(ber));
    }

    std::erase_if(post.bernoullis, [&](const BernoulliComponent& b) { return b.existence < cfg.prune_r; });
    if (static_cast<int>(post.bernoullis.size()) > cfg.max_components) {
        std::stable_sort(post.bernoullis.begin(), post.bernoullis.end(),
                         [](const auto& a, const auto& b) { return a.existence > b.existence; });
        post.bernoullis.resize(static_cast<std::size_t>(cfg.max_components));
    }
    post.hypotheses.front().selectors.assign(post.bernoullis.size(), 0);
    return result;
}

Estimate estimate(const PMBBelief& belief, double report_r) {
    Estimate e;
    e.ue = UEState::from_vec(belief.ue.mean);
    for (const auto& b : belief.bernoullis) {
        if (b.existence <= report_r) continue;
        const std::size_t k = b.most_likely_kind();
        e.map.push_back({b.density[k].mean, kMapKinds[k], b.existence});
    }
    return e;
}

double correct_da_weight(const UpdateResult& result, std::span<const int> truth_assoc) {
    const int m = result.num_measurements;
    if (static_cast<int>(truth_assoc.size()) != m)
        throw LengthMismatch("truth labels must match the measurements");
    const int rows = static_cast<int>(result.row_tags.size());
    auto has_row_with_tag = [&](int tag) {
        return std::find(result.row_tags.begin(), result.row_tags.end(), tag) != result.row_tags.end();
    };

    double total = 0.0;
    for (const auto& wa : result.associations) {
        std::vector<int> row_of_meas(static_cast<std::size_t>(m), -1);
        bool ok = true;
        for (int i = 0; i < rows && ok; ++i) {
            const int col = wa.assignment.row_to_col[static_cast<std::size_t>(i)];
            if (col < 0 || col >= m) continue;
            row_of_meas[static_cast<std::size_t>(col)] = i;
            ok = truth_assoc[col] != kClutterLabel && truth_assoc[col] == result.row_tags[i];
        }
        for (int j = 0; j < m && ok; ++j) {
            const int label = truth_assoc[j];
            const bool should_link = label != kClutterLabel && has_row_with_tag(label);
            ok = should_link == (row_of_meas[j] >= 0);
        }
        if (ok) total += wa.weight;
    }
    return total;
}

}  // namespace radioslam
