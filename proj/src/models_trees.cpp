#include <algorithm>
#include <cmath>

#include "models_internal.hpp"
#include "pathclass/error.hpp"

namespace pathclass::detail {

using nlohmann::json;

namespace {

// Flat tree; internal nodes route value <= threshold left. Leaves vote +/-1.
struct Tree {
    std::vector<int> feature;      // -1 on leaves
    std::vector<double> threshold;
    std::vector<int> left, right;  // -1 on leaves
    std::vector<int> leaf;         // +/-1 on leaves, 0 on internal nodes

    int predict(const SparseVector& x) const {
        int node = 0;
        while (feature[static_cast<size_t>(node)] >= 0) {
            const int j = feature[static_cast<size_t>(node)];
            const auto it = std::lower_bound(
                x.entries.begin(), x.entries.end(), j,
                [](const std::pair<int, double>& e, int col) { return e.first < col; });
            const double v = (it != x.entries.end() && it->first == j) ? it->second : 0.0;
            node = v <= threshold[static_cast<size_t>(node)] ? left[static_cast<size_t>(node)]
                                                             : right[static_cast<size_t>(node)];
        }
        return leaf[static_cast<size_t>(node)];
    }
};

struct Csc {
    size_t dims = 0;
    std::vector<std::vector<std::pair<int, double>>> cols;  // (row, value)
};

Csc to_csc(const std::vector<FeatureInput>& inputs) {
    Csc csc;
    csc.dims = std::get<SparseVector>(inputs[0]).dims;
    csc.cols.resize(csc.dims);
    for (size_t i = 0; i < inputs.size(); ++i) {
        for (const auto& [col, v] : std::get<SparseVector>(inputs[i]).entries) {
            if (v != 0.0) csc.cols[static_cast<size_t>(col)].emplace_back(static_cast<int>(i), v);
        }
    }
    return csc;
}

struct TreeBuilder {
    const Csc& csc;
    const std::vector<int>& y;        // +/-1 per row
    const std::vector<double>& d;     // instance weights, sum 1
    int max_depth;

    Tree tree;
    std::vector<char> in_node;
    std::vector<double> colval;       // scratch for partitioning

    TreeBuilder(const Csc& csc_, const std::vector<int>& y_, const std::vector<double>& d_,
                int max_depth_)
        : csc(csc_), y(y_), d(d_), max_depth(max_depth_) {
        in_node.assign(y.size(), 0);
        colval.assign(y.size(), 0.0);
    }

    int add_leaf(double wpos, double wneg) {
        tree.feature.push_back(-1);
        tree.threshold.push_back(0.0);
        tree.left.push_back(-1);
        tree.right.push_back(-1);
        tree.leaf.push_back(wpos >= wneg ? 1 : -1);
        return static_cast<int>(tree.feature.size()) - 1;
    }

    static double gini(double wp, double wn) {
        const double w = wp + wn;
        if (w <= 0.0) return 0.0;
        return 1.0 - (wp * wp + wn * wn) / (w * w);
    }

    int build(const std::vector<int>& rows, int depth) {
        double wpos = 0.0, wneg = 0.0;
        for (int r : rows) (y[static_cast<size_t>(r)] == 1 ? wpos : wneg) += d[static_cast<size_t>(r)];
        if (depth >= max_depth || wpos == 0.0 || wneg == 0.0 || rows.size() < 2)
            return add_leaf(wpos, wneg);

        for (int r : rows) in_node[static_cast<size_t>(r)] = 1;

        // Best weighted-Gini split over all (feature, threshold) pairs; zeros
        // of the sparse column form an implicit block at value 0.
        int best_feature = -1;
        double best_thr = 0.0, best_score = gini(wpos, wneg);
        bool found = false;
        std::vector<std::pair<double, int>> nz;  // (value, row)
        for (size_t j = 0; j < csc.dims; ++j) {
            nz.clear();
            double nzp = 0.0, nzn = 0.0;
            size_t nz_rows = 0;
            for (const auto& [row, v] : csc.cols[j]) {
                if (!in_node[static_cast<size_t>(row)]) continue;
                nz.emplace_back(v, row);
                (y[static_cast<size_t>(row)] == 1 ? nzp : nzn) += d[static_cast<size_t>(row)];
                ++nz_rows;
            }
            if (nz_rows == 0) continue;  // column constant zero inside the node
            std::sort(nz.begin(), nz.end());

            // Distinct-value blocks, with the zero block spliced in.
            struct Block {
                double value, wp, wn;
                size_t cnt;
            };
            std::vector<Block> blocks;
            const size_t zero_cnt = rows.size() - nz_rows;
            bool zero_inserted = zero_cnt == 0;
            auto maybe_insert_zero = [&](double next_value) {
                if (!zero_inserted && 0.0 < next_value) {
                    blocks.push_back({0.0, wpos - nzp, wneg - nzn, zero_cnt});
                    zero_inserted = true;
                }
            };
            for (size_t i = 0; i < nz.size();) {
                size_t k = i;
                double bp = 0.0, bn = 0.0;
                while (k < nz.size() && nz[k].first == nz[i].first) {
                    (y[static_cast<size_t>(nz[k].second)] == 1 ? bp : bn) +=
                        d[static_cast<size_t>(nz[k].second)];
                    ++k;
                }
                maybe_insert_zero(nz[i].first);
                if (nz[i].first == 0.0 && !zero_inserted) {
                    bp += wpos - nzp;
                    bn += wneg - nzn;
                    zero_inserted = true;
                    blocks.push_back({0.0, bp, bn, k - i + zero_cnt});
                } else {
                    blocks.push_back({nz[i].first, bp, bn, k - i});
                }
                i = k;
            }
            if (!zero_inserted) blocks.push_back({0.0, wpos - nzp, wneg - nzn, zero_cnt});
            if (blocks.size() < 2) continue;

            double lp = 0.0, ln = 0.0;
            for (size_t b = 0; b + 1 < blocks.size(); ++b) {
                lp += blocks[b].wp;
                ln += blocks[b].wn;
                const double rp = wpos - lp, rn = wneg - ln;
                const double score =
                    ((lp + ln) * gini(lp, ln) + (rp + rn) * gini(rp, rn)) / (wpos + wneg);
                if (score < best_score - 1e-12) {
                    best_score = score;
                    best_feature = static_cast<int>(j);
                    best_thr = 0.5 * (blocks[b].value + blocks[b + 1].value);
                    found = true;
                }
            }
        }

        for (int r : rows) in_node[static_cast<size_t>(r)] = 0;
        if (!found) return add_leaf(wpos, wneg);

        // Partition rows on the chosen column via the scratch value array.
        const auto& col = csc.cols[static_cast<size_t>(best_feature)];
        for (const auto& [row, v] : col) colval[static_cast<size_t>(row)] = v;
        std::vector<int> lrows, rrows;
        for (int r : rows)
            (colval[static_cast<size_t>(r)] <= best_thr ? lrows : rrows).push_back(r);
        for (const auto& [row, v] : col) colval[static_cast<size_t>(row)] = 0.0;

        const int node = add_leaf(0.0, 0.0);  // placeholder, rewritten below
        tree.feature[static_cast<size_t>(node)] = best_feature;
        tree.threshold[static_cast<size_t>(node)] = best_thr;
        tree.leaf[static_cast<size_t>(node)] = 0;
        const int lchild = build(lrows, depth + 1);
        const int rchild = build(rrows, depth + 1);
        tree.left[static_cast<size_t>(node)] = lchild;
        tree.right[static_cast<size_t>(node)] = rchild;
        return node;
    }
};

class BoostedModel final : public ModelBase {
public:
    BoostedModel(const FitContext& ctx, size_t dims, std::vector<Tree> trees,
                 std::vector<double> alphas)
        : ModelBase(ctx), dims_(dims), trees_(std::move(trees)), alphas_(std::move(alphas)) {
        for (double a : alphas_) alpha_total_ += a;
    }

    double score_sparse(const SparseVector& x) const override {
        if (x.dims != dims_) throw InvalidInput("boosted_trees: input dimension mismatch");
        double vote = 0.0;
        for (size_t t = 0; t < trees_.size(); ++t) {
            if (trees_[t].predict(x) == 1) vote += alphas_[t];
        }
        return vote / alpha_total_;
    }

protected:
    void params_to_json(json& out) const override {
        out["dims"] = dims_;
        out["alphas"] = doubles_to_base64(alphas_);
        json jtrees = json::array();
        for (const auto& t : trees_) {
            json jt;
            jt["feature"] = t.feature;
            jt["threshold"] = doubles_to_base64(t.threshold);
            jt["left"] = t.left;
            jt["right"] = t.right;
            jt["leaf"] = t.leaf;
            jtrees.push_back(std::move(jt));
        }
        out["trees"] = std::move(jtrees);
    }

private:
    size_t dims_;
    std::vector<Tree> trees_;
    std::vector<double> alphas_;
    double alpha_total_ = 0.0;
};

}  // namespace

std::unique_ptr<TrainedModel> fit_boosted_trees(const FitContext& ctx,
                                                const std::vector<FeatureInput>& inputs,
                                                const std::vector<int>& labels) {
    const int rounds = static_cast<int>(ctx.spec.hyperparams.at("rounds"));
    const int max_depth = static_cast<int>(ctx.spec.hyperparams.at("max_depth"));
    const size_t n = inputs.size();

    const Csc csc = to_csc(inputs);
    std::vector<int> y(n);
    size_t n_pos = 0;
    for (size_t i = 0; i < n; ++i) {
        y[i] = labels[i] == 1 ? 1 : -1;
        n_pos += static_cast<size_t>(labels[i]);
    }

    std::vector<double> d(n, 1.0 / static_cast<double>(n));
    std::vector<int> all_rows(n);
    for (size_t i = 0; i < n; ++i) all_rows[i] = static_cast<int>(i);

    std::vector<Tree> trees;
    std::vector<double> alphas;
    for (int round = 0; round < rounds; ++round) {
        TreeBuilder builder(csc, y, d, max_depth);
        builder.build(all_rows, 0);

        std::vector<int> h(n);
        double eps = 0.0;
        for (size_t i = 0; i < n; ++i) {
            h[i] = builder.tree.predict(std::get<SparseVector>(inputs[i]));
            if (h[i] != y[i]) eps += d[i];
        }
        if (eps >= 0.5) break;  // weak learner no better than chance: halt

        const double eps_c = std::max(eps, 1e-12);
        const double alpha = 0.5 * std::log((1.0 - eps_c) / eps_c);
        trees.push_back(std::move(builder.tree));
        alphas.push_back(alpha);

        if (eps < 1e-12) break;  // perfect learner: further rounds cannot change votes

        double sum = 0.0;
        for (size_t i = 0; i < n; ++i) {
            d[i] *= std::exp(-alpha * static_cast<double>(y[i] * h[i]));
            sum += d[i];
        }
        for (double& w : d) w /= sum;
    }

    if (trees.empty()) {
        return make_prior_model(ctx, static_cast<double>(n_pos) / static_cast<double>(n));
    }
    return std::make_unique<BoostedModel>(ctx, csc.dims, std::move(trees), std::move(alphas));
}

std::unique_ptr<TrainedModel> load_boosted_trees(const json& params, const FitContext& ctx) {
    const size_t dims = params.at("dims").get<size_t>();
    auto alphas = doubles_from_base64(params.at("alphas").get<std::string>());
    std::vector<Tree> trees;
    for (const auto& jt : params.at("trees")) {
        Tree t;
        t.feature = jt.at("feature").get<std::vector<int>>();
        t.threshold = doubles_from_base64(jt.at("threshold").get<std::string>());
        t.left = jt.at("left").get<std::vector<int>>();
        t.right = jt.at("right").get<std::vector<int>>();
        t.leaf = jt.at("leaf").get<std::vector<int>>();
        const size_t nodes = t.feature.size();
        if (t.threshold.size() != nodes || t.left.size() != nodes || t.right.size() != nodes ||
            t.leaf.size() != nodes || nodes == 0)
            throw FormatError("boosted_trees artifact: inconsistent tree arrays");
        trees.push_back(std::move(t));
    }
    if (trees.size() != alphas.size() || trees.empty())
        throw FormatError("boosted_trees artifact: tree/alpha count mismatch");
    return std::make_unique<BoostedModel>(ctx, dims, std::move(trees), std::move(alphas));
}

}  // namespace pathclass::detail
