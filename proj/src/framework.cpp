#include "genpool/framework.hpp"

#include "genpool/errors.hpp"
#include "genpool/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace genpool {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string at_stage(const char* stage, std::size_t iter) {
    return std::string(" [stage ") + stage + ", iteration " + std::to_string(iter) + "]";
}

bool needs_similarity(const AttentionRule& rule) {
    return !std::holds_alternative<AttnConstant>(rule) && !std::holds_alternative<AttnKeySqNorm>(rule);
}

// Head h keeps only its own slice of the query, so one dot-product pass over the keys yields
// every head's logits as a separate column.
Mat block_diagonal_query(const Mat& q, std::size_t heads) {
    const std::size_t n = q.rows();
    const std::size_t dh = n / heads;
    Mat out(n, heads);
    for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t r = h * dh; r < (h + 1) * dh; ++r) out(r, h) = q[r];
    return out;
}

Mat merge_block_diagonal(const Mat& z, std::size_t heads) {
    const std::size_t n = z.rows();
    const std::size_t dh = n / heads;
    Mat out(n, 1);
    for (std::size_t r = 0; r < n; ++r) out[r] = z(r, r / dh);
    return out;
}

struct AttentionResult {
    Mat a;
    bool stochastic = false;
    std::vector<bool> empty_cols;
};

AttentionResult attend(const AttentionRule& rule, const std::optional<Mat>& s, const Mat& keys,
                       const FeatureMap& fm, std::size_t iter) {
    return std::visit(
        overloaded{
            [&](const AttnSoftmax& r) { return AttentionResult{col_softmax(*s, r.scale), true, {}}; },
            [&](const AttnSinkhorn& r) {
                // Similarities are negated into costs. Scaling by k makes each column sum to one.
                Mat plan = sinkhorn(scale(*s, -1.0), r.params);
                return AttentionResult{scale(plan, static_cast<double>(plan.cols())), true, {}};
            },
            [&](const AttnHardArgmax&) {
                const Mat& sim = *s;
                Mat m(sim.rows(), sim.cols());
                for (std::size_t i = 0; i < sim.rows(); ++i) {
                    std::size_t best = 0;
                    for (std::size_t j = 1; j < sim.cols(); ++j)
                        if (sim(i, j) > sim(i, best)) best = j;
                    m(i, best) = 1.0;
                }
                // A cluster that wins no location has no mean. It is flagged so the caller can keep
                // its previous centroid, and the map is then no longer column stochastic.
                std::vector<bool> empty(sim.cols(), false);
                bool any_empty = false;
                for (std::size_t j = 0; j < m.cols(); ++j) {
                    double count = 0;
                    for (std::size_t i = 0; i < m.rows(); ++i) count += m(i, j);
                    if (count == 0) {
                        empty[j] = any_empty = true;
                        continue;
                    }
                    for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) /= count;
                }
                return AttentionResult{std::move(m), !any_empty, std::move(empty)};
            },
            [&](const AttnRowThenCol& r) {
                return AttentionResult{eta_norm(col_softmax(*s, r.scale), Axis::Rows), false, {}};
            },
            [&](const AttnSigmoidConv& r) {
                if (s->cols() != 1) throw ShapeError("sigmoid_conv attention requires k = 1" + at_stage("attention", iter));
                Mat logits = r.conv.apply(scale(*s, r.in_scale), fm.width(), fm.height());
                return AttentionResult{scale(sigmoid(logits), r.out_scale), false, {}};
            },
            [&](const AttnConstant& r) {
                if (r.a.rows() != fm.p()) {
                    throw ShapeError("constant attention has " + r.a.shape_str() + ", expected p=" +
                                     std::to_string(fm.p()) + " rows" + at_stage("attention", iter));
                }
                const AttentionMatrix probe{r.a, false};
                return AttentionResult{r.a, probe.max_col_sum_error() <= 1e-9, {}};
            },
            [&](const AttnKeySqNorm&) {
                Mat a(keys.cols(), 1);
                for (std::size_t j = 0; j < keys.cols(); ++j) {
                    double s2 = 0;
                    for (std::size_t i = 0; i < keys.rows(); ++i) s2 += keys(i, j) * keys(i, j);
                    a[j] = s2;
                }
                return AttentionResult{std::move(a), false, {}};
            },
        },
        rule);
}

} // namespace

Mat pairwise_similarity(const Mat& k, const Mat& q, Similarity kind) {
    if (k.rows() != q.rows()) {
        throw ShapeError("pairwise_similarity: keys " + k.shape_str() + " and queries " +
                         q.shape_str() + " differ in dimension");
    }
    switch (kind) {
    case Similarity::Dot:
        return matmul(transpose(k), q);
    case Similarity::NegSqEuclid: {
        Mat s(k.cols(), q.cols());
        for (std::size_t i = 0; i < k.cols(); ++i)
            for (std::size_t j = 0; j < q.cols(); ++j) {
                double acc = 0;
                for (std::size_t r = 0; r < k.rows(); ++r) {
                    const double diff = k(r, i) - q(r, j);
                    acc += diff * diff;
                }
                s(i, j) = -acc;
            }
        return s;
    }
    case Similarity::Cosine: {
        auto unit_cols = [](const Mat& m) {
            Mat out = m;
            for (std::size_t j = 0; j < m.cols(); ++j) {
                const double n = frobenius(m.col(j));
                for (std::size_t i = 0; i < m.rows(); ++i) out(i, j) = n > 0 ? m(i, j) / n : 0.0;
            }
            return out;
        };
        return matmul(transpose(unit_cols(k)), unit_cols(q));
    }
    }
    throw ContractError("pairwise_similarity: unknown kind");
}

Mat initialize(const InitRule& rule, const Mat& x) {
    return std::visit(
        overloaded{
            [&](const InitGap&) { return row_mean(x); },
            [&](const InitFixed& r) {
                if (r.u.rows() != x.rows()) {
                    throw ShapeError("init: fixed U has " + r.u.shape_str() + ", features have d=" +
                                     std::to_string(x.rows()));
                }
                return r.u;
            },
            [&](const InitSampleColumns& r) {
                if (r.k < 1 || r.k > x.cols()) {
                    throw ContractError("init: cannot sample k=" + std::to_string(r.k) +
                                        " distinct columns from p=" + std::to_string(x.cols()));
                }
                std::vector<std::size_t> idx(x.cols());
                std::iota(idx.begin(), idx.end(), 0);
                Rng rng = Rng::for_role(r.seed, "init_columns");
                for (std::size_t i = 0; i < r.k; ++i) {
                    const std::size_t j = i + rng.index(idx.size() - i);
                    std::swap(idx[i], idx[j]);
                }
                Mat u(x.rows(), r.k);
                for (std::size_t c = 0; c < r.k; ++c) u.set_col(c, x.col(idx[c]));
                return u;
            },
            [&](const InitColumnsAt& r) {
                if (r.indices.empty()) throw ContractError("init: empty column index list");
                Mat u(x.rows(), r.indices.size());
                for (std::size_t c = 0; c < r.indices.size(); ++c) {
                    if (r.indices[c] >= x.cols()) {
                        throw ContractError("init: column index " + std::to_string(r.indices[c]) +
                                            " out of range p=" + std::to_string(x.cols()));
                    }
                    u.set_col(c, x.col(r.indices[c]));
                }
                return u;
            },
            [&](const InitNormal& r) {
                if (r.mu.cols() != 1 || r.sigma.cols() != 1 || r.mu.rows() != r.sigma.rows()) {
                    throw ShapeError("init: mu " + r.mu.shape_str() + " and sigma " +
                                     r.sigma.shape_str() + " must be matching column vectors");
                }
                if (r.k < 1) throw ContractError("init: k must be at least 1");
                Rng rng = Rng::for_role(r.seed, "init_normal");
                Mat u(r.mu.rows(), r.k);
                for (std::size_t c = 0; c < r.k; ++c)
                    for (std::size_t i = 0; i < u.rows(); ++i)
                        u(i, c) = r.mu[i] + r.sigma[i] * rng.normal();
                return u;
            },
        },
        rule);
}

Mat ColumnMap::apply(const Mat& x) const {
    Mat out = layernorm ? layernorm_cols(x, ln_eps) : x;
    if (weight) out = matmul(*weight, out);
    if (shift_min) out = add_scalar(out, -min(out));
    return out;
}

PooledSet run_pooling(const PoolingSpec& spec, const FeatureMap& fm) {
    if (spec.k < 1) throw ContractError("run_pooling: k must be at least 1");
    if (spec.iters < 1) throw ContractError("run_pooling: iters must be at least 1");
    if (spec.heads < 1) throw ContractError("run_pooling: heads must be at least 1");
    if (spec.heads > 1 && spec.k != 1) throw ContractError("run_pooling: multi-head pooling requires k = 1");
    if (spec.stages.size() != 1 && spec.stages.size() != spec.iters) {
        throw ContractError("run_pooling: expected 1 or " + std::to_string(spec.iters) +
                            " stages, got " + std::to_string(spec.stages.size()));
    }

    Mat x = fm.x();
    Mat u = initialize(spec.init, x);
    if (u.cols() != spec.k) {
        throw ShapeError("run_pooling: initialization produced " + std::to_string(u.cols()) +
                         " vectors, spec asks for k=" + std::to_string(spec.k));
    }

    std::optional<AttentionMatrix> last;
    for (std::size_t t = 0; t < spec.iters; ++t) {
        const Stage& stage = spec.stages[spec.stages.size() == 1 ? 0 : t];

        Mat q = std::visit(overloaded{
                               [&](const ColumnMap& m) { return m.apply(u); },
                               [&](const SigmoidMlpQuery& m) { return sigmoid(m.mlp.apply(u)); },
                           },
                           stage.query);
        const Mat keys = stage.key.apply(x);
        if (spec.heads > 1) {
            if (q.cols() != 1 || q.rows() % spec.heads != 0) {
                throw ShapeError("run_pooling: query " + q.shape_str() + " cannot be split into " +
                                 std::to_string(spec.heads) + " heads" + at_stage("query", t));
            }
            q = block_diagonal_query(q, spec.heads);
        }

        std::optional<Mat> s;
        if (needs_similarity(spec.attention)) {
            if (keys.rows() != q.rows()) {
                throw ShapeError("run_pooling: key " + keys.shape_str() + " vs query " + q.shape_str() +
                                 at_stage("similarity", t));
            }
            s = pairwise_similarity(keys, q, spec.similarity);
        }
        AttentionResult att = attend(spec.attention, s, keys, fm, t);

        const Mat v = std::visit(
            overloaded{
                [&](const ColumnMap& m) { return m.apply(x); },
                [&](const Avg3Project& m) {
                    const Mat centered = sub(x, matmul(m.centering, Mat(1, x.cols(), 1.0)));
                    return matmul(m.projection, avg3(centered, fm.width(), fm.height()));
                },
                [&](const QueryGate&) {
                    if (q.cols() != 1 || q.rows() != x.rows()) {
                        throw ShapeError("run_pooling: query gate " + q.shape_str() + " vs features " +
                                         x.shape_str() + at_stage("value", t));
                    }
                    return diag_left(q, x);
                },
            },
            stage.value);
        if (v.cols() != att.a.rows()) {
            throw ShapeError("run_pooling: value " + v.shape_str() + " vs attention " +
                             att.a.shape_str() + at_stage("pool", t));
        }

        Mat z = std::visit(overloaded{
                               [&](const AlphaParam& alpha) { return weighted_generalized_mean(v, att.a, alpha); },
                               [&](const PoolLse& l) { return lse_pool(v, att.a, l.r); },
                           },
                           spec.pool);

        if (spec.heads > 1) {
            z = merge_block_diagonal(z, spec.heads);
            att.a = row_mean(att.a);
        }
        last = AttentionMatrix{att.a, att.stochastic};

        // Features are updated after pooling so the next iteration sees them but this one does not.
        x = stage.feat_update.apply(x);
        Mat next = std::visit(
            overloaded{
                [&](const UpdateIdentity&) { return z; },
                [&](const UpdateL2Normalize&) {
                    Mat out = z;
                    for (std::size_t c = 0; c < z.cols(); ++c) out.set_col(c, l2_normalize(z.col(c)));
                    return out;
                },
                [&](const UpdateProjectMlp& m) { return m.mlp.apply(matmul(m.w_u, z)); },
                [&](const UpdateGruMlp& m) {
                    const Mat g = m.gru.apply(z, u);
                    return add(g, m.mlp.apply(layernorm_cols(g, m.ln_eps)));
                },
            },
            stage.pool_update);
        for (std::size_t c = 0; c < att.empty_cols.size(); ++c) {
            if (att.empty_cols[c] && next.rows() == u.rows()) next.set_col(c, u.col(c));
        }
        u = std::move(next);
    }

    require_finite(u, "run_pooling output");
    return {u, last};
}

} // namespace genpool
