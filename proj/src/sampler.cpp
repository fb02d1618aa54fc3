#include "bartvs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bartvs {

double terminal_prob(int depth, double exhausted_mass, const TreePrior& prior)
{
    return 1.0 - p_split(depth, prior.gamma, prior.beta) * (1.0 - exhausted_mass);
}

MoveRatio birth_ratio(const BirthGeometry& geom, const LeafSufficientStats& left,
                      const LeafSufficientStats& right, double sigma2, const TreePrior& prior)
{
    MoveRatio r;
    r.log_kernel = std::log(kDeathProb / geom.nog_after) - std::log(kBirthProb / geom.leaves_before);
    r.log_prior = std::log(p_split(geom.depth, prior.gamma, prior.beta)) +
                  std::log(terminal_prob(geom.depth + 1, geom.exhausted_left, prior)) +
                  std::log(terminal_prob(geom.depth + 1, geom.exhausted_right, prior)) -
                  std::log(terminal_prob(geom.depth, geom.exhausted_node, prior));
    r.log_likelihood =
        log_leaf_integrated_likelihood(left.n, left.sum_r, sigma2, prior.sigma_mu2) +
        log_leaf_integrated_likelihood(right.n, right.sum_r, sigma2, prior.sigma_mu2) -
        log_leaf_integrated_likelihood(left.n + right.n, left.sum_r + right.sum_r, sigma2,
                                       prior.sigma_mu2);
    return r;
}

MoveRatio death_ratio(const BirthGeometry& geom, const LeafSufficientStats& left,
                      const LeafSufficientStats& right, double sigma2, const TreePrior& prior)
{
    MoveRatio b = birth_ratio(geom, left, right, sigma2, prior);
    return {-b.log_kernel, -b.log_prior, -b.log_likelihood};
}

std::vector<CutRange> ancestor_ranges(const DecisionTree& tree, NodeId node, const CutpointGrid& grid)
{
    std::vector<CutRange> ranges;
    NodeId child = node;
    NodeId id = tree.node(node).parent;
    while (id != kNoNode) {
        const auto& nd = tree.node(id);
        auto it = std::find_if(ranges.begin(), ranges.end(),
                               [&](const CutRange& r) { return r.feature == nd.feature; });
        if (it == ranges.end()) {
            ranges.push_back({nd.feature, 0, grid.usable(nd.feature)});
            it = ranges.end() - 1;
        }
        if (nd.left == child)
            it->hi = std::min(it->hi, nd.cut_index);
        else
            it->lo = std::max(it->lo, nd.cut_index + 1);
        child = id;
        id = nd.parent;
    }
    return ranges;
}

namespace {

CutRange range_for(const std::vector<CutRange>& ranges, const CutpointGrid& grid, int feature)
{
    for (const auto& r : ranges)
        if (r.feature == feature)
            return r;
    return {feature, 0, grid.usable(feature)};
}

void check_finite(double log_ratio, const char* move)
{
    if (std::isnan(log_ratio))
        throw std::runtime_error(std::string("non-finite Metropolis ratio in ") + move +
                                 " proposal (likelihood overflow)");
}

} // namespace

void Sampler::apply_rule(std::vector<CutRange>& ranges, const CutpointGrid& grid, int feature,
                         int cut, bool left)
{
    auto it = std::find_if(ranges.begin(), ranges.end(),
                           [&](const CutRange& r) { return r.feature == feature; });
    if (it == ranges.end()) {
        ranges.push_back({feature, 0, grid.usable(feature)});
        it = ranges.end() - 1;
    }
    if (left)
        it->hi = std::min(it->hi, cut);
    else
        it->lo = std::max(it->lo, cut + 1);
}

Sampler::Sampler(const Dataset& data, FitConfig config)
    : data_(data), config_(std::move(config)), grid_(data.X), rng_(config_.seed)
{
    config_.validate();
    const Eigen::Index n = data_.n();
    const Eigen::Index p = data_.p();
    const int T = config_.trees;

    const double ymin = data_.y.minCoeff();
    const double ymax = data_.y.maxCoeff();
    if (ymax > ymin) {
        scale_ = ymax - ymin;
        center_ = 0.5 * (ymax + ymin);
    } else {
        scale_ = 1.0;
        center_ = ymin;
    }
    y_ = (data_.y.array() - center_) / scale_;

    double var = 0.0;
    if (n > 1)
        var = (y_.array() - y_.mean()).square().sum() / static_cast<double>(n - 1);
    // constant response: fall back to the variance implied by a unit scaled range
    if (!(var > 0.0))
        var = 0.25;
    lambda_ = calibrate_sigma_lambda(var, config_.nu, config_.q);
    sigma2_ = var;

    const double sigma_mu = 0.5 / (config_.k_leaf * std::sqrt(static_cast<double>(T)));
    prior_ = {config_.gamma, config_.beta, sigma_mu * sigma_mu};

    trees_.assign(T, DecisionTree(0.0));
    leaf_of_.assign(T, std::vector<NodeId>(n, 0));
    resid_ = y_;
    partial_.resize(n);
    var_count_ = Eigen::VectorXi::Zero(p);

    dart_ = config_.prior == PriorKind::dart && !config_.fixed_split_probs;
    rho_ = config_.dart_rho > 0.0 ? config_.dart_rho : static_cast<double>(p);
    const double lam = config_.dart_a / (config_.dart_a + config_.dart_b);
    alpha_ = rho_ * lam / (1.0 - lam);

    if (config_.fixed_split_probs) {
        if (config_.fixed_split_probs->size() != p)
            throw ValidationError("fixed split probabilities must have length p");
        Eigen::VectorXd s = *config_.fixed_split_probs;
        set_split_probs(s / s.sum());
    } else {
        set_split_probs(Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(p)));
    }
}

void Sampler::set_split_probs(Eigen::VectorXd s)
{
    s_ = std::move(s);
    s_cum_.resize(s_.size());
    double acc = 0.0;
    const_mass_ = 0.0;
    for (Eigen::Index j = 0; j < s_.size(); ++j) {
        acc += s_[j];
        s_cum_[j] = acc;
        if (grid_.usable(j) <= 0)
            const_mass_ += s_[j];
    }
}

int Sampler::draw_feature()
{
    std::uniform_real_distribution<double> u(0.0, s_cum_[s_cum_.size() - 1]);
    const double target = u(rng_);
    const double* begin = s_cum_.data();
    const double* end = begin + s_cum_.size();
    const double* it = std::upper_bound(begin, end, target);
    int j = static_cast<int>(std::min<std::ptrdiff_t>(it - begin, s_cum_.size() - 1));
    // never return a zero-probability feature through rounding at the boundary
    while (s_[j] <= 0.0 && j > 0)
        --j;
    return j;
}

double Sampler::exhausted_mass(const std::vector<CutRange>& ranges) const
{
    double mass = const_mass_;
    for (const auto& r : ranges)
        if (grid_.usable(r.feature) > 0 && r.empty())
            mass += s_[r.feature];
    return std::min(mass, 1.0);
}

MoveOutcome Sampler::step_tree(int t)
{
    auto& tree = trees_[t];
    const auto& leaf_of = leaf_of_[t];
    for (Eigen::Index i = 0; i < resid_.size(); ++i)
        partial_[i] = resid_[i] + tree.node(leaf_of[i]).value;

    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double draw = u(rng_);
    MoveOutcome out;
    if (draw < kBirthProb)
        out = propose_birth(t);
    else if (draw < kBirthProb + kDeathProb)
        out = propose_death(t);
    else
        out = propose_change(t);

    redraw_leaves(t);
    return out;
}

MoveOutcome Sampler::propose_birth(int t)
{
    auto& tree = trees_[t];
    auto& leaf_of = leaf_of_[t];
    MoveOutcome out{MoveKind::birth};

    const auto leaves = tree.leaves();
    std::uniform_int_distribution<std::size_t> pick(0, leaves.size() - 1);
    const NodeId leaf = leaves[pick(rng_)];

    auto ranges = ancestor_ranges(tree, leaf, grid_);
    const int j = draw_feature();
    out.feature = j;
    const CutRange range = range_for(ranges, grid_, j);
    if (range.empty()) {
        out.exhausted = true;
        ++moves_.exhausted;
        return out;
    }
    std::uniform_int_distribution<int> cut_draw(range.lo, range.hi - 1);
    const int cut = cut_draw(rng_);
    out.proposed = true;
    ++moves_.birth_proposed;

    LeafSufficientStats left, right;
    const auto& idx = grid_.index();
    const auto n = static_cast<Eigen::Index>(leaf_of.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (leaf_of[i] != leaf)
            continue;
        if (idx(i, j) <= cut)
            left.add(partial_[i]);
        else
            right.add(partial_[i]);
    }
    if (left.n == 0 || right.n == 0)
        return out;

    BirthGeometry geom;
    geom.leaves_before = static_cast<int>(leaves.size());
    int nog = static_cast<int>(tree.nog_nodes().size());
    const NodeId parent = tree.node(leaf).parent;
    if (parent != kNoNode) {
        const auto& pn = tree.node(parent);
        if (tree.node(pn.left).is_leaf() && tree.node(pn.right).is_leaf())
            --nog;
    }
    geom.nog_after = nog + 1;
    geom.depth = tree.depth(leaf);
    geom.exhausted_node = exhausted_mass(ranges);
    auto lr = ranges;
    apply_rule(lr, grid_, j, cut, true);
    geom.exhausted_left = exhausted_mass(lr);
    auto rr = ranges;
    apply_rule(rr, grid_, j, cut, false);
    geom.exhausted_right = exhausted_mass(rr);

    const MoveRatio ratio = birth_ratio(geom, left, right, sigma2_, prior_);
    check_finite(ratio.log_ratio(), "BIRTH");
    out.accept_prob = ratio.accept_prob();

    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (std::log(u(rng_)) < ratio.log_ratio()) {
        out.accepted = true;
        ++moves_.birth_accepted;
        auto [l, r] = tree.split(leaf, j, cut, grid_.cutpoint(j, cut));
        tree.node(leaf).accept_prob = out.accept_prob;
        for (Eigen::Index i = 0; i < n; ++i)
            if (leaf_of[i] == leaf)
                leaf_of[i] = idx(i, j) <= cut ? l : r;
        ++var_count_[j];
    }
    return out;
}

MoveOutcome Sampler::propose_death(int t)
{
    auto& tree = trees_[t];
    auto& leaf_of = leaf_of_[t];
    MoveOutcome out{MoveKind::death};

    const auto nogs = tree.nog_nodes();
    if (nogs.empty())
        return out;
    std::uniform_int_distribution<std::size_t> pick(0, nogs.size() - 1);
    const NodeId node = nogs[pick(rng_)];
    const TreeNode nd = tree.node(node);
    out.feature = nd.feature;
    out.proposed = true;
    ++moves_.death_proposed;

    LeafSufficientStats left, right;
    const auto n = static_cast<Eigen::Index>(leaf_of.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (leaf_of[i] == nd.left)
            left.add(partial_[i]);
        else if (leaf_of[i] == nd.right)
            right.add(partial_[i]);
    }

    // Geometry of the reverse BIRTH from the pruned tree.
    BirthGeometry geom;
    geom.leaves_before = tree.leaf_count() - 1;
    geom.nog_after = static_cast<int>(nogs.size());
    geom.depth = tree.depth(node);
    auto ranges = ancestor_ranges(tree, node, grid_);
    geom.exhausted_node = exhausted_mass(ranges);
    auto lr = ranges;
    apply_rule(lr, grid_, nd.feature, nd.cut_index, true);
    geom.exhausted_left = exhausted_mass(lr);
    auto rr = ranges;
    apply_rule(rr, grid_, nd.feature, nd.cut_index, false);
    geom.exhausted_right = exhausted_mass(rr);

    const MoveRatio ratio = death_ratio(geom, left, right, sigma2_, prior_);
    check_finite(ratio.log_ratio(), "DEATH");
    out.accept_prob = ratio.accept_prob();

    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (std::log(u(rng_)) < ratio.log_ratio()) {
        out.accepted = true;
        ++moves_.death_accepted;
        for (Eigen::Index i = 0; i < n; ++i)
            if (leaf_of[i] == nd.left || leaf_of[i] == nd.right)
                leaf_of[i] = node;
        --var_count_[nd.feature];
        tree.collapse(node);
    }
    return out;
}

MoveOutcome Sampler::propose_change(int t)
{
    auto& tree = trees_[t];
    auto& leaf_of = leaf_of_[t];
    MoveOutcome out{MoveKind::change};

    const auto nogs = tree.nog_nodes();
    if (nogs.empty())
        return out;
    std::uniform_int_distribution<std::size_t> pick(0, nogs.size() - 1);
    const NodeId node = nogs[pick(rng_)];
    const TreeNode nd = tree.node(node);

    auto ranges = ancestor_ranges(tree, node, grid_);
    const int j = draw_feature();
    out.feature = j;
    const CutRange range = range_for(ranges, grid_, j);
    if (range.empty()) {
        out.exhausted = true;
        ++moves_.exhausted;
        return out;
    }
    std::uniform_int_distribution<int> cut_draw(range.lo, range.hi - 1);
    const int cut = cut_draw(rng_);
    out.proposed = true;
    ++moves_.change_proposed;

    LeafSufficientStats old_l, old_r, new_l, new_r;
    const auto& idx = grid_.index();
    const auto n = static_cast<Eigen::Index>(leaf_of.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const NodeId at = leaf_of[i];
        if (at != nd.left && at != nd.right)
            continue;
        (at == nd.left ? old_l : old_r).add(partial_[i]);
        (idx(i, j) <= cut ? new_l : new_r).add(partial_[i]);
    }
    if (new_l.n == 0 || new_r.n == 0)
        return out;

    const int depth = tree.depth(node);
    auto old_lr = ranges, old_rr = ranges, new_lr = ranges, new_rr = ranges;
    apply_rule(old_lr, grid_, nd.feature, nd.cut_index, true);
    apply_rule(old_rr, grid_, nd.feature, nd.cut_index, false);
    apply_rule(new_lr, grid_, j, cut, true);
    apply_rule(new_rr, grid_, j, cut, false);

    MoveRatio ratio;
    ratio.log_prior = std::log(terminal_prob(depth + 1, exhausted_mass(new_lr), prior_)) +
                      std::log(terminal_prob(depth + 1, exhausted_mass(new_rr), prior_)) -
                      std::log(terminal_prob(depth + 1, exhausted_mass(old_lr), prior_)) -
                      std::log(terminal_prob(depth + 1, exhausted_mass(old_rr), prior_));
    const double s2 = sigma2_;
    const double m2 = prior_.sigma_mu2;
    ratio.log_likelihood = log_leaf_integrated_likelihood(new_l.n, new_l.sum_r, s2, m2) +
                           log_leaf_integrated_likelihood(new_r.n, new_r.sum_r, s2, m2) -
                           log_leaf_integrated_likelihood(old_l.n, old_l.sum_r, s2, m2) -
                           log_leaf_integrated_likelihood(old_r.n, old_r.sum_r, s2, m2);
    check_finite(ratio.log_ratio(), "CHANGE");
    out.accept_prob = ratio.accept_prob();

    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (std::log(u(rng_)) < ratio.log_ratio()) {
        out.accepted = true;
        ++moves_.change_accepted;
        auto& target = tree.node(node);
        --var_count_[target.feature];
        target.feature = j;
        target.cut_index = cut;
        target.cutpoint = grid_.cutpoint(j, cut);
        target.accept_prob = out.accept_prob;
        ++var_count_[j];
        for (Eigen::Index i = 0; i < n; ++i)
            if (leaf_of[i] == nd.left || leaf_of[i] == nd.right)
                leaf_of[i] = idx(i, j) <= cut ? nd.left : nd.right;
    }
    return out;
}

void Sampler::redraw_leaves(int t)
{
    auto& tree = trees_[t];
    const auto& leaf_of = leaf_of_[t];
    stats_buf_.assign(tree.arena_size(), LeafSufficientStats{});
    const auto n = static_cast<Eigen::Index>(leaf_of.size());
    for (Eigen::Index i = 0; i < n; ++i)
        stats_buf_[leaf_of[i]].add(partial_[i]);
    for (NodeId id : tree.leaves())
        tree.node(id).value = sample_leaf_value(stats_buf_[id], sigma2_, prior_.sigma_mu2, rng_);
    for (Eigen::Index i = 0; i < n; ++i)
        resid_[i] = partial_[i] - tree.node(leaf_of[i]).value;
}

void Sampler::update_sigma2()
{
    sigma2_ = sample_sigma2(resid_.squaredNorm(), static_cast<long>(resid_.size()), config_.nu,
                            lambda_, rng_);
}

void Sampler::update_dart()
{
    Eigen::VectorXd s = update_split_probs(var_count_, alpha_, rng_);
    set_split_probs(std::move(s));
    const auto draw = sample_alpha(s_, config_.dart_a, config_.dart_b, rho_, config_.alpha_grid,
                                   rng_, alpha_);
    alpha_ = draw.alpha;
    if (draw.warning)
        ++moves_.alpha_warnings;
}

void Sampler::iterate()
{
    for (int t = 0; t < config_.trees; ++t)
        step_tree(t);
    update_sigma2();
    if (dart_ && iteration_ >= config_.effective_dart_start())
        update_dart();
    ++iteration_;
}

PosteriorTrace Sampler::make_trace() const
{
    const Eigen::Index K = config_.draws;
    const Eigen::Index p = data_.p();
    PosteriorTrace trace;
    trace.counts = Eigen::MatrixXi::Zero(K, p);
    trace.inclusion = MatrixXb::Constant(K, p, false);
    trace.sigma2_path = Eigen::VectorXd::Zero(K);
    trace.tree_leaves = Eigen::MatrixXi::Zero(K, config_.trees);
    trace.mean_fit_path = Eigen::VectorXd::Zero(K);
    if (config_.record_mi)
        trace.mi_node_log.emplace(K);
    if (config_.prior == PriorKind::dart) {
        trace.s_path = Eigen::MatrixXd::Zero(K, p);
        trace.alpha_path = Eigen::VectorXd::Zero(K);
    }
    trace.config = config_;
    trace.feature_names = data_.feature_names;
    return trace;
}

void Sampler::record(PosteriorTrace& trace, Eigen::Index k) const
{
    trace.counts.row(k) = var_count_.transpose();
    trace.inclusion.row(k) = (var_count_.array() > 0).transpose();
    trace.sigma2_path[k] = sigma2();
    for (int t = 0; t < config_.trees; ++t)
        trace.tree_leaves(k, t) = trees_[t].leaf_count();
    const double mean_fit_scaled = (y_ - resid_).mean();
    trace.mean_fit_path[k] = scale_ * mean_fit_scaled + center_;
    if (trace.mi_node_log) {
        auto& nodes = (*trace.mi_node_log)[k];
        nodes.clear();
        for (const auto& tree : trees_)
            for (NodeId id : tree.internal_nodes())
                nodes.push_back({tree.node(id).feature, tree.node(id).accept_prob});
    }
    if (trace.s_path) {
        trace.s_path->row(k) = s_.transpose();
        (*trace.alpha_path)[k] = alpha_;
    }
    trace.moves = moves_;
}

EnsembleState Sampler::state() const
{
    EnsembleState st;
    st.trees = trees_;
    const double shift = center_ / static_cast<double>(trees_.size());
    for (auto& t : st.trees)
        t.affine_leaves(scale_, shift);
    st.sigma2 = sigma2();
    if (config_.prior == PriorKind::dart) {
        st.split_probs = s_;
        st.alpha = alpha_;
    }
    return st;
}

PosteriorTrace fit(const Dataset& data, const FitConfig& config)
{
    Sampler sampler(data, config);
    PosteriorTrace trace = sampler.make_trace();
    const int total = config.burn_in + config.draws;
    for (int it = 0; it < total; ++it) {
        sampler.iterate();
        if (it >= config.burn_in)
            sampler.record(trace, it - config.burn_in);
    }
    trace.moves = sampler.moves();
    return trace;
}

} // namespace bartvs
