#include "pathclass/nets.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "pathclass/error.hpp"
#include "pathclass/metrics.hpp"
#include "pathclass/rng.hpp"

namespace pathclass {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using CMap = Eigen::Map<const MatrixXd>;
using Map = Eigen::Map<MatrixXd>;

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

double bce_from_logits(const std::vector<double>& z, const std::vector<int>& labels) {
    double loss = 0.0;
    for (size_t i = 0; i < z.size(); ++i)
        loss += softplus(z[i]) - static_cast<double>(labels[i]) * z[i];
    return loss / static_cast<double>(z.size());
}

void check_batch(const std::vector<CharSequence>& batch, int l) {
    if (batch.empty()) throw InvalidInput("net: empty batch");
    for (const auto& seq : batch) {
        if (seq.l != l || seq.indices.size() != static_cast<size_t>(l))
            throw InvalidInput("net: sequence length does not match the network");
    }
}

// Uniform Glorot-style fill, all draws from the shared generator.
void fill_uniform(double* p, size_t n, double limit, Rng& rng) {
    for (size_t i = 0; i < n; ++i) p[i] = (2.0 * rng.real() - 1.0) * limit;
}

class CharCnnNet final : public NetCore {
public:
    explicit CharCnnNet(const CnnShape& s) : s_(s) {
        if (s_.m < 1 || s_.l < 1) throw InvalidInput("char_cnn: bad alphabet or length");
        l1_ = s_.l - s_.conv1_width + 1;
        if (l1_ < 1) throw InvalidInput("char_cnn: sequence shorter than conv1 width");
        p_ = l1_ / s_.pool_width;
        if (p_ < 1) throw InvalidInput("char_cnn: pooled length is zero");
        l2_ = p_ - s_.conv2_width + 1;
        if (l2_ < 1) throw InvalidInput("char_cnn: pooled length shorter than conv2 width");

        off_e_ = 0;
        off_w1_ = off_e_ + static_cast<size_t>(s_.embed_dim) * static_cast<size_t>(s_.m);
        off_b1_ = off_w1_ + static_cast<size_t>(s_.conv1_filters) * dw1();
        off_w2_ = off_b1_ + static_cast<size_t>(s_.conv1_filters);
        off_b2_ = off_w2_ + static_cast<size_t>(s_.conv2_filters) * fw2();
        off_wd_ = off_b2_ + static_cast<size_t>(s_.conv2_filters);
        off_bd_ = off_wd_ + static_cast<size_t>(s_.dense_units) * static_cast<size_t>(s_.conv2_filters);
        off_wo_ = off_bd_ + static_cast<size_t>(s_.dense_units);
        off_bo_ = off_wo_ + static_cast<size_t>(s_.dense_units);
        n_params_ = off_bo_ + 1;
    }

    size_t n_params() const override { return n_params_; }

    void init_params(std::vector<double>& params, uint64_t seed) const override {
        params.assign(n_params_, 0.0);
        Rng rng(seed);
        fill_uniform(&params[off_e_], off_w1_ - off_e_, 0.05, rng);
        fill_uniform(&params[off_w1_], off_b1_ - off_w1_,
                     std::sqrt(6.0 / static_cast<double>(dw1() + static_cast<size_t>(s_.conv1_filters))), rng);
        fill_uniform(&params[off_w2_], off_b2_ - off_w2_,
                     std::sqrt(6.0 / static_cast<double>(fw2() + static_cast<size_t>(s_.conv2_filters))), rng);
        fill_uniform(&params[off_wd_], off_bd_ - off_wd_,
                     std::sqrt(6.0 / static_cast<double>(s_.conv2_filters + s_.dense_units)), rng);
        fill_uniform(&params[off_wo_], off_bo_ - off_wo_,
                     std::sqrt(6.0 / static_cast<double>(s_.dense_units + 1)), rng);
        // biases stay zero
    }

    double loss(const std::vector<double>& params, const std::vector<CharSequence>& batch,
                const std::vector<int>& labels) const override {
        return bce_from_logits(logits(params, batch), labels);
    }

    std::vector<double> logits(const std::vector<double>& params,
                               const std::vector<CharSequence>& batch) const override {
        Cache c;
        return forward(params, batch, c);
    }

    double loss_and_grad(const std::vector<double>& params, const std::vector<CharSequence>& batch,
                         const std::vector<int>& labels, std::vector<double>& grad) const override {
        Cache c;
        const std::vector<double> z = forward(params, batch, c);
        const double loss = bce_from_logits(z, labels);
        const size_t b = batch.size();

        grad.assign(n_params_, 0.0);
        CMap e(&params[off_e_], s_.embed_dim, s_.m);
        CMap w1(&params[off_w1_], s_.conv1_filters, static_cast<long>(dw1()));
        CMap w2(&params[off_w2_], s_.conv2_filters, static_cast<long>(fw2()));
        CMap wd(&params[off_wd_], s_.dense_units, s_.conv2_filters);
        CMap wo(&params[off_wo_], s_.dense_units, 1);
        Map ge(&grad[off_e_], s_.embed_dim, s_.m);
        Map gw1(&grad[off_w1_], s_.conv1_filters, static_cast<long>(dw1()));
        Map gb1(&grad[off_b1_], s_.conv1_filters, 1);
        Map gw2(&grad[off_w2_], s_.conv2_filters, static_cast<long>(fw2()));
        Map gb2(&grad[off_b2_], s_.conv2_filters, 1);
        Map gwd(&grad[off_wd_], s_.dense_units, s_.conv2_filters);
        Map gbd(&grad[off_bd_], s_.dense_units, 1);
        Map gwo(&grad[off_wo_], s_.dense_units, 1);

        VectorXd dz(static_cast<long>(b));
        for (size_t i = 0; i < b; ++i)
            dz[static_cast<long>(i)] = (sigmoid(z[i]) - static_cast<double>(labels[i])) /
                                       static_cast<double>(b);

        // dense head
        MatrixXd dh = wo * dz.transpose();               // U x B
        gwo = c.h * dz;
        grad[off_bo_] = dz.sum();
        dh = (c.h_pre.array() > 0.0).select(dh, 0.0);    // through ReLU
        gwd = dh * c.g.transpose();
        gbd = dh.rowwise().sum();
        MatrixXd dg = wd.transpose() * dh;               // F2 x B

        // global max pool
        MatrixXd da2 = MatrixXd::Zero(s_.conv2_filters, static_cast<long>(b) * l2_);
        for (size_t i = 0; i < b; ++i) {
            for (int f = 0; f < s_.conv2_filters; ++f) {
                da2(f, static_cast<long>(i) * l2_ + c.gmax_arg(f, static_cast<long>(i))) +=
                    dg(f, static_cast<long>(i));
            }
        }
        da2 = (c.c2.array() > 0.0).select(da2, 0.0);
        gw2 = da2 * c.x2.transpose();
        gb2 = da2.rowwise().sum();
        MatrixXd dx2 = w2.transpose() * da2;             // F1*w2 x B*L2

        // col2im into pooled map, then unpool to conv1 activations
        MatrixXd dp1 = MatrixXd::Zero(s_.conv1_filters, static_cast<long>(b) * p_);
        for (size_t i = 0; i < b; ++i) {
            for (int t = 0; t < l2_; ++t) {
                const long col = static_cast<long>(i) * l2_ + t;
                for (int tap = 0; tap < s_.conv2_width; ++tap) {
                    dp1.col(static_cast<long>(i) * p_ + t + tap) +=
                        dx2.col(col).segment(static_cast<long>(tap) * s_.conv1_filters,
                                             s_.conv1_filters);
                }
            }
        }
        MatrixXd da1 = MatrixXd::Zero(s_.conv1_filters, static_cast<long>(b) * l1_);
        for (size_t i = 0; i < b; ++i) {
            for (int p = 0; p < p_; ++p) {
                const long src = static_cast<long>(i) * p_ + p;
                for (int f = 0; f < s_.conv1_filters; ++f) {
                    da1(f, static_cast<long>(i) * l1_ + p * s_.pool_width + c.pool_arg(f, src)) +=
                        dp1(f, src);
                }
            }
        }
        da1 = (c.c1.array() > 0.0).select(da1, 0.0);
        gw1 = da1 * c.x1.transpose();
        gb1 = da1.rowwise().sum();
        MatrixXd dx1 = w1.transpose() * da1;             // d*w1 x B*L1

        // col2im into embedding rows
        for (size_t i = 0; i < b; ++i) {
            const auto& idx = batch[i].indices;
            for (int t = 0; t < l1_; ++t) {
                const long col = static_cast<long>(i) * l1_ + t;
                for (int tap = 0; tap < s_.conv1_width; ++tap) {
                    const int32_t ch = idx[static_cast<size_t>(t + tap)];
                    if (ch >= 1 && ch <= s_.m) {
                        ge.col(ch - 1) += dx1.col(col).segment(
                            static_cast<long>(tap) * s_.embed_dim, s_.embed_dim);
                    }
                }
            }
        }
        return loss;
    }

private:
    struct Cache {
        MatrixXd x1, c1, x2, c2;          // im2col inputs and pre-activations
        MatrixXd g, h_pre, h;             // global pool output, dense pre/post
        Eigen::MatrixXi pool_arg, gmax_arg;
    };

    size_t dw1() const { return static_cast<size_t>(s_.embed_dim) * static_cast<size_t>(s_.conv1_width); }
    size_t fw2() const { return static_cast<size_t>(s_.conv1_filters) * static_cast<size_t>(s_.conv2_width); }

    std::vector<double> forward(const std::vector<double>& params,
                                const std::vector<CharSequence>& batch, Cache& c) const {
        check_batch(batch, s_.l);
        const size_t b = batch.size();
        CMap e(&params[off_e_], s_.embed_dim, s_.m);
        CMap w1(&params[off_w1_], s_.conv1_filters, static_cast<long>(dw1()));
        CMap b1(&params[off_b1_], s_.conv1_filters, 1);
        CMap w2(&params[off_w2_], s_.conv2_filters, static_cast<long>(fw2()));
        CMap b2(&params[off_b2_], s_.conv2_filters, 1);
        CMap wd(&params[off_wd_], s_.dense_units, s_.conv2_filters);
        CMap bd(&params[off_bd_], s_.dense_units, 1);
        CMap wo(&params[off_wo_], s_.dense_units, 1);
        const double bo = params[off_bo_];

        // im2col over embeddings; pad/unknown indices contribute zero columns
        c.x1 = MatrixXd::Zero(static_cast<long>(dw1()), static_cast<long>(b) * l1_);
        for (size_t i = 0; i < b; ++i) {
            const auto& idx = batch[i].indices;
            for (int t = 0; t < l1_; ++t) {
                const long col = static_cast<long>(i) * l1_ + t;
                for (int tap = 0; tap < s_.conv1_width; ++tap) {
                    const int32_t ch = idx[static_cast<size_t>(t + tap)];
                    if (ch >= 1 && ch <= s_.m) {
                        c.x1.col(col).segment(static_cast<long>(tap) * s_.embed_dim,
                                              s_.embed_dim) = e.col(ch - 1);
                    }
                }
            }
        }
        c.c1 = (w1 * c.x1).colwise() + b1.col(0);

        // max pool width/stride pool_width, remainder dropped
        MatrixXd p1 = MatrixXd::Zero(s_.conv1_filters, static_cast<long>(b) * p_);
        c.pool_arg.resize(s_.conv1_filters, static_cast<long>(b) * p_);
        for (size_t i = 0; i < b; ++i) {
            for (int p = 0; p < p_; ++p) {
                const long dst = static_cast<long>(i) * p_ + p;
                for (int f = 0; f < s_.conv1_filters; ++f) {
                    double best = -1e300;
                    int arg = 0;
                    for (int k = 0; k < s_.pool_width; ++k) {
                        const double v = std::max(
                            0.0, c.c1(f, static_cast<long>(i) * l1_ + p * s_.pool_width + k));
                        if (v > best) {
                            best = v;
                            arg = k;
                        }
                    }
                    p1(f, dst) = best;
                    c.pool_arg(f, dst) = arg;
                }
            }
        }

        c.x2 = MatrixXd::Zero(static_cast<long>(fw2()), static_cast<long>(b) * l2_);
        for (size_t i = 0; i < b; ++i) {
            for (int t = 0; t < l2_; ++t) {
                const long col = static_cast<long>(i) * l2_ + t;
                for (int tap = 0; tap < s_.conv2_width; ++tap) {
                    c.x2.col(col).segment(static_cast<long>(tap) * s_.conv1_filters,
                                          s_.conv1_filters) =
                        p1.col(static_cast<long>(i) * p_ + t + tap);
                }
            }
        }
        c.c2 = (w2 * c.x2).colwise() + b2.col(0);

        c.g = MatrixXd::Zero(s_.conv2_filters, static_cast<long>(b));
        c.gmax_arg.resize(s_.conv2_filters, static_cast<long>(b));
        for (size_t i = 0; i < b; ++i) {
            for (int f = 0; f < s_.conv2_filters; ++f) {
                double best = -1e300;
                int arg = 0;
                for (int t = 0; t < l2_; ++t) {
                    const double v = std::max(0.0, c.c2(f, static_cast<long>(i) * l2_ + t));
                    if (v > best) {
                        best = v;
                        arg = t;
                    }
                }
                c.g(f, static_cast<long>(i)) = best;
                c.gmax_arg(f, static_cast<long>(i)) = arg;
            }
        }

        c.h_pre = (wd * c.g).colwise() + bd.col(0);
        c.h = c.h_pre.cwiseMax(0.0);

        std::vector<double> z(b);
        for (size_t i = 0; i < b; ++i)
            z[i] = wo.col(0).dot(c.h.col(static_cast<long>(i))) + bo;
        return z;
    }

    CnnShape s_;
    int l1_ = 0, p_ = 0, l2_ = 0;
    size_t off_e_ = 0, off_w1_ = 0, off_b1_ = 0, off_w2_ = 0, off_b2_ = 0, off_wd_ = 0,
           off_bd_ = 0, off_wo_ = 0, off_bo_ = 0, n_params_ = 0;
};

class CharLstmNet final : public NetCore {
public:
    explicit CharLstmNet(const LstmShape& s) : s_(s) {
        if (s_.m < 1 || s_.l < 1) throw InvalidInput("char_lstm: bad alphabet or length");
        off_e_ = 0;
        off_w_ = off_e_ + static_cast<size_t>(s_.embed_dim) * static_cast<size_t>(s_.m);
        off_u_ = off_w_ + 4 * static_cast<size_t>(s_.hidden) * static_cast<size_t>(s_.embed_dim);
        off_b_ = off_u_ + 4 * static_cast<size_t>(s_.hidden) * static_cast<size_t>(s_.hidden);
        off_wo_ = off_b_ + 4 * static_cast<size_t>(s_.hidden);
        off_bo_ = off_wo_ + static_cast<size_t>(s_.hidden);
        n_params_ = off_bo_ + 1;
    }

    size_t n_params() const override { return n_params_; }

    void init_params(std::vector<double>& params, uint64_t seed) const override {
        params.assign(n_params_, 0.0);
        Rng rng(seed);
        fill_uniform(&params[off_e_], off_w_ - off_e_, 0.05, rng);
        fill_uniform(&params[off_w_], off_u_ - off_w_,
                     std::sqrt(6.0 / static_cast<double>(s_.embed_dim + s_.hidden)), rng);
        fill_uniform(&params[off_u_], off_b_ - off_u_,
                     std::sqrt(6.0 / static_cast<double>(2 * s_.hidden)), rng);
        // forget-gate bias starts at 1 so early gradients flow through time
        for (int i = 0; i < s_.hidden; ++i) params[off_b_ + static_cast<size_t>(s_.hidden + i)] = 1.0;
        fill_uniform(&params[off_wo_], off_bo_ - off_wo_,
                     std::sqrt(6.0 / static_cast<double>(s_.hidden + 1)), rng);
    }

    double loss(const std::vector<double>& params, const std::vector<CharSequence>& batch,
                const std::vector<int>& labels) const override {
        return bce_from_logits(logits(params, batch), labels);
    }

    std::vector<double> logits(const std::vector<double>& params,
                               const std::vector<CharSequence>& batch) const override {
        Cache c;
        return forward(params, batch, c);
    }

    double loss_and_grad(const std::vector<double>& params, const std::vector<CharSequence>& batch,
                         const std::vector<int>& labels, std::vector<double>& grad) const override {
        Cache c;
        const std::vector<double> z = forward(params, batch, c);
        const double loss = bce_from_logits(z, labels);
        const long b = static_cast<long>(batch.size());
        const int h = s_.hidden;

        grad.assign(n_params_, 0.0);
        CMap w(&params[off_w_], 4 * h, s_.embed_dim);
        CMap u(&params[off_u_], 4 * h, h);
        CMap wo(&params[off_wo_], h, 1);
        Map ge(&grad[off_e_], s_.embed_dim, s_.m);
        Map gw(&grad[off_w_], 4 * h, s_.embed_dim);
        Map gu(&grad[off_u_], 4 * h, h);
        Map gb(&grad[off_b_], 4 * h, 1);
        Map gwo(&grad[off_wo_], h, 1);

        VectorXd dz(b);
        for (long i = 0; i < b; ++i)
            dz[i] = (sigmoid(z[static_cast<size_t>(i)]) -
                     static_cast<double>(labels[static_cast<size_t>(i)])) /
                    static_cast<double>(b);

        gwo = c.hs.back() * dz;
        grad[off_bo_] = dz.sum();

        MatrixXd dh = wo * dz.transpose();  // h x B
        MatrixXd dc = MatrixXd::Zero(h, b);
        MatrixXd dzt(4 * h, b);
        for (int t = s_.l - 1; t >= 0; --t) {
            const auto& st = c.steps[static_cast<size_t>(t)];
            const MatrixXd& h_prev = t == 0 ? c.zero : c.hs[static_cast<size_t>(t - 1)];
            const MatrixXd& c_prev = t == 0 ? c.zero : c.cs[static_cast<size_t>(t - 1)];

            const auto i_g = st.gates.topRows(h);
            const auto f_g = st.gates.middleRows(h, h);
            const auto g_g = st.gates.middleRows(2 * h, h);
            const auto o_g = st.gates.bottomRows(h);

            const MatrixXd d_o = dh.cwiseProduct(st.tanh_c);
            dc += dh.cwiseProduct(o_g).cwiseProduct(
                (1.0 - st.tanh_c.array().square()).matrix());
            const MatrixXd d_i = dc.cwiseProduct(g_g);
            const MatrixXd d_g = dc.cwiseProduct(i_g);
            const MatrixXd d_f = dc.cwiseProduct(c_prev);

            dzt.topRows(h) = d_i.cwiseProduct(i_g).cwiseProduct((1.0 - i_g.array()).matrix());
            dzt.middleRows(h, h) =
                d_f.cwiseProduct(f_g).cwiseProduct((1.0 - f_g.array()).matrix());
            dzt.middleRows(2 * h, h) =
                d_g.cwiseProduct((1.0 - g_g.array().square()).matrix());
            dzt.bottomRows(h) = d_o.cwiseProduct(o_g).cwiseProduct((1.0 - o_g.array()).matrix());

            gw.noalias() += dzt * st.x.transpose();
            gu.noalias() += dzt * h_prev.transpose();
            gb += dzt.rowwise().sum();

            const MatrixXd dx = w.transpose() * dzt;  // d x B
            for (long i = 0; i < b; ++i) {
                const int32_t ch = batch[static_cast<size_t>(i)].indices[static_cast<size_t>(t)];
                if (ch >= 1 && ch <= s_.m) ge.col(ch - 1) += dx.col(i);
            }
            dh = u.transpose() * dzt;
            dc = dc.cwiseProduct(f_g);
        }
        return loss;
    }

private:
    struct Step {
        MatrixXd x;      // d x B embedded inputs
        MatrixXd gates;  // 4h x B post-activation [i,f,g,o]
        MatrixXd tanh_c; // h x B
    };
    struct Cache {
        std::vector<Step> steps;
        std::vector<MatrixXd> hs, cs;  // per-step states, h x B
        MatrixXd zero;
    };

    std::vector<double> forward(const std::vector<double>& params,
                                const std::vector<CharSequence>& batch, Cache& c) const {
        check_batch(batch, s_.l);
        const long b = static_cast<long>(batch.size());
        const int h = s_.hidden;
        CMap e(&params[off_e_], s_.embed_dim, s_.m);
        CMap w(&params[off_w_], 4 * h, s_.embed_dim);
        CMap u(&params[off_u_], 4 * h, h);
        CMap bias(&params[off_b_], 4 * h, 1);
        CMap wo(&params[off_wo_], h, 1);

        c.zero = MatrixXd::Zero(h, b);
        c.steps.resize(static_cast<size_t>(s_.l));
        c.hs.resize(static_cast<size_t>(s_.l));
        c.cs.resize(static_cast<size_t>(s_.l));

        MatrixXd h_prev = c.zero, c_prev = c.zero;
        for (int t = 0; t < s_.l; ++t) {
            Step& st = c.steps[static_cast<size_t>(t)];
            st.x = MatrixXd::Zero(s_.embed_dim, b);
            for (long i = 0; i < b; ++i) {
                const int32_t ch = batch[static_cast<size_t>(i)].indices[static_cast<size_t>(t)];
                if (ch >= 1 && ch <= s_.m) st.x.col(i) = e.col(ch - 1);
            }
            MatrixXd zt = ((w * st.x + u * h_prev).colwise() + bias.col(0));
            st.gates.resize(4 * h, b);
            st.gates.topRows(h) = zt.topRows(h).unaryExpr([](double v) { return sigmoid(v); });
            st.gates.middleRows(h, h) =
                zt.middleRows(h, h).unaryExpr([](double v) { return sigmoid(v); });
            st.gates.middleRows(2 * h, h) = zt.middleRows(2 * h, h).array().tanh();
            st.gates.bottomRows(h) =
                zt.bottomRows(h).unaryExpr([](double v) { return sigmoid(v); });

            c.cs[static_cast<size_t>(t)] =
                st.gates.middleRows(h, h).cwiseProduct(c_prev) +
                st.gates.topRows(h).cwiseProduct(st.gates.middleRows(2 * h, h));
            st.tanh_c = c.cs[static_cast<size_t>(t)].array().tanh();
            c.hs[static_cast<size_t>(t)] = st.gates.bottomRows(h).cwiseProduct(st.tanh_c);

            h_prev = c.hs[static_cast<size_t>(t)];
            c_prev = c.cs[static_cast<size_t>(t)];
        }

        std::vector<double> z(static_cast<size_t>(b));
        for (long i = 0; i < b; ++i)
            z[static_cast<size_t>(i)] = wo.col(0).dot(h_prev.col(i)) + params[off_bo_];
        return z;
    }

    LstmShape s_;
    size_t off_e_ = 0, off_w_ = 0, off_u_ = 0, off_b_ = 0, off_wo_ = 0, off_bo_ = 0,
           n_params_ = 0;
};

}  // namespace

std::unique_ptr<NetCore> make_char_cnn(const CnnShape& shape) {
    return std::make_unique<CharCnnNet>(shape);
}

std::unique_ptr<NetCore> make_char_lstm(const LstmShape& shape) {
    return std::make_unique<CharLstmNet>(shape);
}

namespace {

// Evaluates logits over an index subset in bounded-size chunks so the im2col
// buffers stay small regardless of the subset size.
std::vector<double> logits_over(const NetCore& net, const std::vector<double>& params,
                                const std::vector<CharSequence>& inputs,
                                const std::vector<size_t>& idx, size_t chunk) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (size_t start = 0; start < idx.size(); start += chunk) {
        const size_t end = std::min(idx.size(), start + chunk);
        std::vector<CharSequence> xs;
        xs.reserve(end - start);
        for (size_t k = start; k < end; ++k) xs.push_back(inputs[idx[k]]);
        for (double z : net.logits(params, xs)) out.push_back(z);
    }
    return out;
}

}  // namespace

NetTrainResult train_net(const NetCore& net, const std::vector<CharSequence>& inputs,
                         const std::vector<int>& labels, const NetTrainOptions& options) {
    if (inputs.empty() || inputs.size() != labels.size())
        throw InvalidInput("train_net: bad inputs");
    if (options.epochs < 1 || options.batch < 1 || options.lr <= 0.0)
        throw InvalidInput("train_net: bad options");

    Rng rng(derive_seed(options.seed, "net_train"));

    // Validation split for early stopping.
    std::vector<size_t> order(inputs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    const size_t n_val = static_cast<size_t>(options.val_fraction *
                                             static_cast<double>(inputs.size()));
    std::vector<size_t> val_idx(order.begin(), order.begin() + static_cast<long>(n_val));
    std::vector<size_t> train_idx(order.begin() + static_cast<long>(n_val), order.end());
    if (train_idx.empty()) {
        train_idx = order;
        val_idx.clear();
    }

    NetTrainResult result;
    net.init_params(result.params, derive_seed(options.seed, "net_init"));

    std::vector<double> m(result.params.size(), 0.0), v(result.params.size(), 0.0), grad;
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;

    std::vector<double> best_params;
    double best_metric = -1.0;
    int bad_epochs = 0;

    std::vector<CharSequence> batch;
    std::vector<int> batch_y;
    for (int epoch = 1; epoch <= options.epochs; ++epoch) {
        rng.shuffle(train_idx);
        for (size_t start = 0; start < train_idx.size();
             start += static_cast<size_t>(options.batch)) {
            const size_t end =
                std::min(train_idx.size(), start + static_cast<size_t>(options.batch));
            batch.clear();
            batch_y.clear();
            for (size_t k = start; k < end; ++k) {
                batch.push_back(inputs[train_idx[k]]);
                batch_y.push_back(labels[train_idx[k]]);
            }
            net.loss_and_grad(result.params, batch, batch_y, grad);
            ++step;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (size_t i = 0; i < result.params.size(); ++i) {
                m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
                result.params[i] -= options.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
            }
        }
        result.epochs_run = epoch;

        if (!val_idx.empty()) {
            std::vector<int> vy;
            for (size_t i : val_idx) vy.push_back(labels[i]);
            const std::vector<double> vz = logits_over(net, result.params, inputs, val_idx,
                                                       static_cast<size_t>(options.batch));
            try {
                const double auc = roc_auc(vz, vy);
                if (auc > best_metric + 1e-12) {
                    best_metric = auc;
                    best_params = result.params;
                    bad_epochs = 0;
                } else if (++bad_epochs > options.patience) {
                    result.early_stopped = true;
                    break;
                }
            } catch (const UndefinedMetric&) {
                // single-class validation split: no early-stopping signal
            }
        }
    }
    if (!best_params.empty()) result.params = std::move(best_params);

    std::vector<int> ty;
    for (size_t i : train_idx) ty.push_back(labels[i]);
    const std::vector<double> tz = logits_over(net, result.params, inputs, train_idx,
                                               static_cast<size_t>(options.batch));
    double loss = 0.0;
    for (size_t i = 0; i < tz.size(); ++i) {
        const double z = tz[i];
        loss += (z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z))) -
                static_cast<double>(ty[i]) * z;
    }
    result.final_train_loss = loss / static_cast<double>(tz.size());
    return result;
}

}  // namespace pathclass
