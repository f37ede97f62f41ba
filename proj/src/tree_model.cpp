#include "xtree/tree_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace xtree {

void prepare_input(const Representation& repr, const SparseVector& x, PreparedInput& out) {
    out.borrowed = nullptr;
    if (repr.kind == ReprKind::DenseEmbedding) {
        out.dense = true;
        repr.embed(x, out.vec);
    } else {
        out.dense = false;
        if (repr.weighting == FeatureWeighting::Uniform) {
            if (x.dimension() != repr.input_dim)
                throw std::invalid_argument("input dimension does not match the representation");
            out.borrowed = &x;
        } else {
            out.owned = repr.transform_sparse(x);
        }
    }
}

double node_probability(const NodeModel& node, const PreparedInput& input) {
    double p = input.dense ? predict_prob(node, std::span<const double>(input.vec))
                           : predict_prob(node, input.sparse());
    return std::max(p, 1e-12);
}

double node_update(NodeModel& node, const PreparedInput& input, double target, double weight,
                   const LrSchedule& schedule, double l2, std::vector<double>* input_grad) {
    if (input.dense)
        return update(node, std::span<const double>(input.vec), target, weight, schedule, l2,
                      input_grad);
    return update(node, input.sparse(), target, weight, schedule, l2);
}

std::vector<double> renormalize_siblings(std::vector<double> estimates) {
    double sum = 0.0;
    for (double p : estimates) sum += p;
    if (sum > 0.0 && sum < 1.0)
        for (double& p : estimates) p /= sum;
    return estimates;
}

}  // namespace xtree
