#include "mirspec/pca.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace mirspec {

PcaModel pca_fit(std::span<const float> data, std::size_t n, std::size_t dim,
                 int d) {
    if (n < 2) throw Error("bad-pca", "PCA needs at least 2 samples");
    if (d < 1 || static_cast<std::size_t>(d) > dim)
        throw Error("bad-pca", "component count must satisfy 1 <= d <= K");
    if (data.size() != n * dim)
        throw Error("bad-pca", "data length does not match n*dim");

    Eigen::MatrixXd x(n, dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                data[i * dim + j];

    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    // Full V keeps the components orthonormal even past the data rank
    // (those directions simply carry zero variance).
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const auto& v = svd.matrixV();

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + dim);
    model.total_variance = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        model.total_variance += sv(i) * sv(i) / static_cast<double>(n - 1);

    model.components.resize(d, std::vector<double>(dim, 0.0));
    model.explained_variance.resize(d, 0.0);
    for (int c = 0; c < d; ++c) {
        model.explained_variance[c] =
            c < sv.size() ? sv(c) * sv(c) / static_cast<double>(n - 1) : 0.0;
        Eigen::VectorXd dir = v.col(c);
        // sign convention: largest-magnitude coordinate positive
        Eigen::Index arg = 0;
        dir.cwiseAbs().maxCoeff(&arg);
        if (dir(arg) < 0.0) dir = -dir;
        for (std::size_t j = 0; j < dim; ++j) model.components[c][j] = dir(j);
    }
    return model;
}

PcaModel pca_fit(const SpectraTable& table, int d) {
    table.validate();
    return pca_fit(table.values, table.row_count(), table.channels(), d);
}

std::vector<double> pca_transform_one(const PcaModel& model,
                                      std::span<const float> spectrum) {
    if (spectrum.size() != model.input_dim())
        throw Error("length-mismatch",
                    "spectrum length does not match the PCA input dimension");
    std::vector<double> out(model.n_components(), 0.0);
    for (std::size_t c = 0; c < model.n_components(); ++c) {
        double s = 0.0;
        const auto& dir = model.components[c];
        for (std::size_t j = 0; j < spectrum.size(); ++j)
            s += dir[j] * (spectrum[j] - model.mean[j]);
        out[c] = s;
    }
    return out;
}

std::vector<double> pca_transform(const PcaModel& model,
                                  std::span<const float> data, std::size_t n,
                                  std::size_t dim) {
    if (dim != model.input_dim())
        throw Error("length-mismatch",
                    "data dimension does not match the PCA input dimension");
    if (data.size() != n * dim)
        throw Error("bad-pca", "data length does not match n*dim");
    std::vector<double> out(n * model.n_components());
    for (std::size_t i = 0; i < n; ++i) {
        const auto scores =
            pca_transform_one(model, data.subspan(i * dim, dim));
        std::copy(scores.begin(), scores.end(),
                  out.begin() + static_cast<std::ptrdiff_t>(i * model.n_components()));
    }
    return out;
}

std::vector<double> pca_transform(const PcaModel& model,
                                  const SpectraTable& table) {
    table.validate();
    return pca_transform(model, table.values, table.row_count(),
                         table.channels());
}

}  // namespace mirspec
