#include "dpdsis/isis.hpp"

#include "dpdsis/errors.hpp"
#include "dpdsis/stats.hpp"

#include <algorithm>
#include <cmath>

namespace dpdsis {

namespace {

Matrix gather_columns(MatrixRef x, const IndexList& cols) {
    Matrix out(x.rows(), static_cast<Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.col(static_cast<Index>(j)) = x.col(cols[j]);
    }
    return out;
}

// Restricts a fit over `from` to the members of `to` (a subset of `from`).
PenalizedFit restrict_fit(const PenalizedFit& fit, const IndexList& from, const IndexList& to) {
    PenalizedFit out = fit;
    out.coefficients = Vector::Zero(static_cast<Index>(to.size()));
    for (std::size_t j = 0; j < to.size(); ++j) {
        const auto pos = std::find(from.begin(), from.end(), to[j]);
        if (pos != from.end()) {
            out.coefficients[static_cast<Index>(j)] = fit.coefficients[pos - from.begin()];
        }
    }
    return out;
}

IndexList nonzero_members(const PenalizedFit& fit, const IndexList& cols) {
    IndexList out;
    for (Index j : support(fit)) {
        out.push_back(cols[static_cast<std::size_t>(j)]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void check_isis_input(VectorRef y, MatrixRef x) {
    if (x.rows() != y.size()) {
        throw DimensionError("covariate matrix has " + std::to_string(x.rows()) + " rows but response has " +
                             std::to_string(y.size()) + " entries");
    }
    if (x.cols() < 1) {
        throw ArgumentError("need at least one covariate");
    }
}

}  // namespace

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::size_reached:
            return "size_reached";
        case StopReason::active_set_unchanged:
            return "active_set_unchanged";
        case StopReason::max_iter:
            return "max_iter";
    }
    return "?";
}

Index default_isis_d(Index n) {
    if (n < 2) {
        throw ArgumentError("default model size needs n >= 2");
    }
    const double nd = static_cast<double>(n);
    return std::max<Index>(1, static_cast<Index>(std::floor(nd / std::log(nd))));
}

SisResult run_dpd_sis(VectorRef y, MatrixRef x, double alpha, Index d, bool refit, std::optional<double> lambda,
                      const FitOptions& opts, unsigned threads) {
    check_isis_input(y, x);
    SisResult out;
    out.ranking = dpd_sis_scores(y, x, alpha, opts, threads);
    out.screened = select_top(out.ranking, d);
    if (!refit) {
        out.final_model = out.screened;
        return out;
    }
    const double lam = lambda.value_or(default_lambda(static_cast<double>(y.size()), static_cast<double>(x.cols())));
    const Matrix xs = gather_columns(x, out.screened.indices);
    out.refit = fit_penalized_dpd(y, xs, alpha, lam, opts);
    IndexList kept;
    for (Index j : support(*out.refit)) {
        kept.push_back(out.screened.indices[static_cast<std::size_t>(j)]);
    }
    out.final_model = ModelSet{kept, d};
    return out;
}

Vector compute_residuals(VectorRef y, MatrixRef x_sub, const PenalizedFit& fit) {
    if (x_sub.rows() != y.size() || x_sub.cols() != fit.coefficients.size()) {
        throw DimensionError("residuals need " + std::to_string(fit.coefficients.size()) + " columns and " +
                             std::to_string(y.size()) + " rows");
    }
    Vector r = y.array() - fit.intercept;
    if (x_sub.cols() > 0) {
        r.noalias() -= x_sub * fit.coefficients;
    }
    return r;
}

ModelSet trim_to_size(const ModelSet& active, const Ranking& ranking_last, Index d) {
    if (static_cast<Index>(active.indices.size()) <= d) {
        return active;
    }
    IndexList members = active.indices;
    std::stable_sort(members.begin(), members.end(), [&](Index a, Index b) {
        const double sa = ranking_last.scores[a];
        const double sb = ranking_last.scores[b];
        if (sa != sb) return sa > sb;
        return a < b;
    });
    members.resize(static_cast<std::size_t>(std::max<Index>(d, 0)));
    std::sort(members.begin(), members.end());
    return ModelSet{members, d};
}

IsisResult run_dpd_isis(VectorRef y, MatrixRef x, const IsisConfig& cfg, const FitOptions& opts) {
    check_isis_input(y, x);
    if (cfg.d < 1) {
        throw ArgumentError("model size d must be at least 1");
    }
    if (cfg.schedule == DPrimeSchedule::fixed && cfg.fixed_k < 1) {
        throw ArgumentError("fixed d' schedule needs k >= 1");
    }
    if (cfg.max_iter < 1) {
        throw ArgumentError("max_iter must be at least 1");
    }
    if (!(cfg.alpha >= 0.0)) {
        throw DomainError("alpha must be nonnegative");
    }
    const Index n = y.size();
    const Index p = x.cols();
    const double lambda = cfg.lambda.value_or(default_lambda(static_cast<double>(n), static_cast<double>(p)));

    IsisResult out;
    Vector working = y;
    IndexList available(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) available[static_cast<std::size_t>(j)] = j;
    IndexList pool;
    IndexList previous_active;
    bool have_previous = false;

    for (int iter = 1;; ++iter) {
        IsisIteration rec;
        if (cfg.schedule == DPrimeSchedule::fixed) {
            rec.d_prime = cfg.fixed_k;
        } else if (iter == 1) {
            rec.d_prime = std::max<Index>(1, 2 * cfg.d / 3);
        } else {
            rec.d_prime = std::max<Index>(1, cfg.d - static_cast<Index>(previous_active.size()));
        }

        const Matrix xw = gather_columns(x, available);
        const Ranking local = dpd_sis_scores(working, xw, cfg.alpha, opts, cfg.threads);
        const ModelSet top = select_top(local, rec.d_prime);
        for (Index j : top.indices) {
            rec.candidates.push_back(available[static_cast<std::size_t>(j)]);
        }
        for (Index j : rec.candidates) {
            if (std::find(pool.begin(), pool.end(), j) == pool.end()) pool.push_back(j);
        }
        rec.pool = pool;

        const Matrix xp = gather_columns(x, pool);
        rec.refit = fit_penalized_dpd(y, xp, cfg.alpha, lambda, opts);
        rec.active = nonzero_members(rec.refit, pool);
        out.iterations.push_back(rec);
        const IsisIteration& cur = out.iterations.back();

        const auto active_size = static_cast<Index>(cur.active.size());
        bool stop = false;
        if (active_size >= cfg.d) {
            out.stop_reason = StopReason::size_reached;
            stop = true;
        } else if (have_previous && active_size == static_cast<Index>(previous_active.size())) {
            out.stop_reason = StopReason::active_set_unchanged;
            stop = true;
        } else if (iter >= cfg.max_iter) {
            out.stop_reason = StopReason::max_iter;
            stop = true;
        }

        IndexList next_available;
        for (Index j = 0; j < p; ++j) {
            if (!std::binary_search(cur.active.begin(), cur.active.end(), j)) next_available.push_back(j);
        }
        if (!stop && next_available.empty()) {
            out.stop_reason = StopReason::max_iter;
            stop = true;
        }
        if (stop) {
            break;
        }
        const Matrix xa = gather_columns(x, cur.active);
        working = compute_residuals(y, xa, restrict_fit(cur.refit, cur.pool, cur.active));
        available = std::move(next_available);
        previous_active = cur.active;
        have_previous = true;
    }

    const IsisIteration& last = out.iterations.back();
    ModelSet active{last.active, cfg.d};
    if (static_cast<Index>(active.indices.size()) > cfg.d) {
        // Score the active members against the last working response.
        const Matrix xa = gather_columns(x, active.indices);
        const Ranking member_scores = dpd_sis_scores(working, xa, cfg.alpha, opts, cfg.threads);
        Vector full = Vector::Zero(p);
        for (std::size_t j = 0; j < active.indices.size(); ++j) {
            full[active.indices[j]] = member_scores.scores[static_cast<Index>(j)];
        }
        active = trim_to_size(active, make_ranking(full, member_scores.method), cfg.d);
        out.trimmed = true;
    }

    if (active.indices.empty()) {
        out.final_fit = fit_location_scale(y, cfg.alpha, opts);
        out.final_fit.lambda = lambda;
        out.final_model = ModelSet{{}, cfg.d};
        return out;
    }
    const Matrix xf = gather_columns(x, active.indices);
    PenalizedControl ctl;
    ctl.warm_start = restrict_fit(last.refit, last.pool, active.indices);
    const PenalizedFit fin = fit_penalized_dpd(y, xf, cfg.alpha, lambda, opts, ctl);
    IndexList kept;
    for (Index j : support(fin)) kept.push_back(active.indices[static_cast<std::size_t>(j)]);
    out.final_fit = restrict_fit(fin, active.indices, kept);
    out.final_model = ModelSet{kept, cfg.d};
    return out;
}

}  // namespace dpdsis
