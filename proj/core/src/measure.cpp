#include "flagwalk/measure.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "flagwalk/error.hpp"
#include "flagwalk/exterior.hpp"

namespace flagwalk {

MeasureSpec::MeasureSpec(std::vector<Atom> atoms, std::string label)
    : atoms_(std::move(atoms)), label_(std::move(label)) {
    if (atoms_.empty()) throw InvalidArgument("measure needs at least one atom");
    const int dim = atoms_.front().g.dim();
    double total = 0.0;
    for (const Atom& a : atoms_) {
        if (a.g.dim() != dim) throw InvalidArgument("atoms of different ranks");
        if (!(a.weight > 0.0) || !std::isfinite(a.weight)) throw InvalidArgument("atom weights must be positive");
        total += a.weight;
    }
    for (Atom& a : atoms_) a.weight /= total;
    cumulative_.resize(atoms_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        acc += atoms_[i].weight;
        cumulative_[i] = acc;
    }
    cumulative_.back() = 1.0;
    for (const Atom& a : atoms_) {
        std::vector<Matrix> w;
        for (int d = 2; d < dim; ++d) w.push_back(exterior_power(a.g.matrix(), d).entries);
        wedges_.push_back(std::move(w));
    }
}

MeasureSpec MeasureSpec::transposed() const {
    std::vector<Atom> out;
    for (const Atom& a : atoms_) out.push_back({a.g.transpose(), a.weight});
    return MeasureSpec(std::move(out), label_ + " (transposed)");
}

MeasureSpec MeasureSpec::conjugated(const Matrix& c) const {
    const Matrix ci = c.inverse();
    std::vector<Atom> out;
    for (const Atom& a : atoms_) out.push_back({GroupElement::normalized(c * a.g.matrix() * ci), a.weight});
    return MeasureSpec(std::move(out), label_ + " (conjugated)");
}

MeasureSpec parse_measure_spec(const std::string& text, const std::string& label) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("measure spec is not valid JSON: ") + e.what());
    }
    try {
        const int m = doc.at("m").get<int>();
        if (m < 1) throw InvalidArgument("measure spec: m must be >= 1");
        const int n = m + 1;
        std::vector<Atom> atoms;
        for (const auto& item : doc.at("atoms")) {
            const auto rows = item.at("matrix").get<std::vector<std::vector<double>>>();
            if (static_cast<int>(rows.size()) != n) throw InvalidArgument("measure spec: matrix has wrong size");
            Matrix a(n, n);
            for (int i = 0; i < n; ++i) {
                if (static_cast<int>(rows[i].size()) != n) throw InvalidArgument("measure spec: matrix row has wrong size");
                for (int j = 0; j < n; ++j) a(i, j) = rows[i][j];
            }
            const double det = a.determinant();
            if (!std::isfinite(det) || std::abs(det - 1.0) > 1e-6)
                throw InvalidArgument("measure spec: atom determinant " + std::to_string(det) + " differs from 1 by more than 1e-6");
            atoms.push_back({GroupElement::normalized(a), item.at("weight").get<double>()});
        }
        std::string name = label;
        if (doc.contains("label")) name = doc.at("label").get<std::string>();
        MeasureSpec spec(std::move(atoms), name);
        if (doc.contains("lyapunov")) {
            const auto v = doc.at("lyapunov").get<std::vector<double>>();
            if (static_cast<int>(v.size()) != n) throw InvalidArgument("measure spec: lyapunov vector has wrong size");
            spec.set_lyapunov(Eigen::Map<const Vector>(v.data(), n));
        }
        return spec;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("measure spec: ") + e.what());
    }
}

MeasureSpec load_measure_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open measure spec " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_measure_spec(buf.str(), path.stem().string());
}

std::string to_json(const MeasureSpec& spec) {
    using nlohmann::json;
    json doc;
    doc["m"] = spec.rank();
    if (!spec.label().empty()) doc["label"] = spec.label();
    json atoms = json::array();
    for (const Atom& a : spec.atoms()) {
        json rows = json::array();
        for (int i = 0; i < a.g.dim(); ++i) {
            json row = json::array();
            for (int j = 0; j < a.g.dim(); ++j) row.push_back(a.g(i, j));
            rows.push_back(row);
        }
        atoms.push_back({{"matrix", rows}, {"weight", a.weight}});
    }
    doc["atoms"] = atoms;
    if (spec.lyapunov()) doc["lyapunov"] = std::vector<double>(spec.lyapunov()->begin(), spec.lyapunov()->end());
    return doc.dump(2);
}

bool DensityReport::dense() const {
    if (!proximal) return false;
    for (bool b : irreducible)
        if (!b) return false;
    return true;
}

namespace {

// Dimension of the span of all words of length <= maxLen in the given
// matrices, grown breadth-first with an orthonormal basis of R^{D x D}.
long word_span_dimension(const std::vector<Matrix>& gens, int maxLen) {
    const Eigen::Index dim = gens.front().rows();
    const Eigen::Index full = dim * dim;
    std::vector<Vector> basis;
    std::vector<Matrix> frontier;
    auto try_add = [&](const Matrix& w) {
        Vector v = Eigen::Map<const Vector>(w.data(), full);
        const double scale = v.norm();
        if (scale == 0.0) return false;
        v /= scale;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vector& b : basis) v -= b.dot(v) * b;
        const double r = v.norm();
        if (r < 1e-9) return false;
        basis.push_back(v / r);
        return true;
    };
    const Matrix id = Matrix::Identity(dim, dim);
    try_add(id);
    frontier.push_back(id);
    for (int len = 1; len <= maxLen && static_cast<Eigen::Index>(basis.size()) < full; ++len) {
        std::vector<Matrix> next;
        for (const Matrix& w : frontier)
            for (const Matrix& g : gens) {
                Matrix p = w * g;
                p /= p.cwiseAbs().maxCoeff();
                if (try_add(p)) next.push_back(p);
            }
        if (next.empty()) break;
        frontier = std::move(next);
    }
    return static_cast<long>(basis.size());
}

}  // namespace

DensityReport zariski_density_heuristic(const MeasureSpec& spec, int maxWordLength) {
    DensityReport report;
    const int m = spec.rank();
    for (int d = 1; d <= m; ++d) {
        std::vector<Matrix> gens;
        for (const Atom& a : spec.atoms()) gens.push_back(exterior_power(a.g.matrix(), d).entries);
        const long dim = binomial(m + 1, d);
        report.irreducible.push_back(word_span_dimension(gens, maxWordLength) == dim * dim);
    }

    // Enumerate words breadth-first (capped) and look for a regular Cartan projection.
    const std::size_t cap = 20000;
    std::vector<Matrix> frontier{Matrix::Identity(m + 1, m + 1)};
    std::size_t visited = 0;
    for (int len = 1; len <= maxWordLength && !report.proximal && visited < cap; ++len) {
        std::vector<Matrix> next;
        for (const Matrix& w : frontier) {
            for (const Atom& a : spec.atoms()) {
                Matrix p = w * a.g.matrix();
                const double s = p.cwiseAbs().maxCoeff();
                p /= s;
                const Vector kappa = cartan_decompose(p, std::log(s)).kappa;
                bool regular = true;
                for (int i = 0; i < m; ++i) regular = regular && kappa(i) - kappa(i + 1) > 1e-6;
                if (regular) report.proximal = true;
                next.push_back(std::move(p));
                if (++visited >= cap || report.proximal) break;
            }
            if (visited >= cap || report.proximal) break;
        }
        frontier = std::move(next);
    }
    return report;
}

}  // namespace flagwalk
