#include "dtwc/eval.hpp"

#include <algorithm>
#include <map>

namespace dtwc {

ConfusionMatrix confusion(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw Error(ErrorCode::length_mismatch, std::to_string(predicted.size()) +
                                                    " predictions vs " +
                                                    std::to_string(truth.size()) + " labels");
    if (predicted.empty()) throw Error(ErrorCode::empty_input, "no predictions");

    ConfusionMatrix m;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const int p = predicted[i];
        const int t = truth[i];
        if ((p != 0 && p != 1) || (t != 0 && t != 1))
            throw Error(ErrorCode::non_binary_target, "labels must be 0 or 1");
        if (p == 1 && t == 1) ++m.tp;
        else if (p == 1 && t == 0) ++m.fp;
        else if (p == 0 && t == 1) ++m.fn;
        else ++m.tn;
    }
    return m;
}

MetricsReport metrics(const ConfusionMatrix& matrix) {
    if (matrix.total() == 0) throw Error(ErrorCode::empty_matrix, "empty confusion matrix");

    MetricsReport r;
    r.matrix = matrix;
    const double tp = static_cast<double>(matrix.tp);
    const double fp = static_cast<double>(matrix.fp);
    const double fn = static_cast<double>(matrix.fn);
    const double tn = static_cast<double>(matrix.tn);

    r.precision = (tp + fp) > 0.0 ? tp / (tp + fp) : 0.0;
    r.recall = (tp + fn) > 0.0 ? tp / (tp + fn) : 0.0;
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    r.accuracy = (tp + tn) / (tp + fp + fn + tn);
    return r;
}

std::vector<std::pair<std::string, double>> mean_f1_by_vectorizer(
    const std::vector<SuiteScore>& scores) {
    if (scores.empty()) throw Error(ErrorCode::empty_group, "no scores to group");

    std::map<std::string, std::pair<double, std::size_t>> groups;
    for (const auto& s : scores) {
        auto& [sum, count] = groups[s.vectorizer];
        sum += s.f1;
        ++count;
    }

    std::vector<std::pair<std::string, double>> out;
    out.reserve(groups.size());
    for (const auto& [name, agg] : groups)
        out.emplace_back(name, agg.first / static_cast<double>(agg.second));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

} // namespace dtwc
