#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flagwalk/lie.hpp"
#include "flagwalk/rng.hpp"

namespace flagwalk {

struct Atom {
    GroupElement g;
    double weight;
};

// Finitely supported probability measure on SL(m+1, R).
class MeasureSpec {
public:
    // Weights must be positive; they are rescaled to sum to one.
    MeasureSpec(std::vector<Atom> atoms, std::string label = {});

    int rank() const { return atoms_.front().g.rank(); }
    int dim() const { return rank() + 1; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    const std::string& label() const { return label_; }

    // Optional stored estimate of the Lyapunov vector.
    const std::optional<Vector>& lyapunov() const { return lyapunov_; }
    void set_lyapunov(Vector sigma) { lyapunov_ = std::move(sigma); }

    std::size_t sample_index(Rng& rng) const { return rng.categorical(cumulative_.data(), cumulative_.size()); }
    const Matrix& sample(Rng& rng) const { return atoms_[sample_index(rng)].g.matrix(); }
    // Exterior powers of atom i in degrees 2..m, in the order of exterior_power.
    const std::vector<Matrix>& atom_wedges(std::size_t i) const { return wedges_[i]; }

    // Image measure under g -> g^T.
    MeasureSpec transposed() const;
    // Image measure under g -> c g c^{-1}.
    MeasureSpec conjugated(const Matrix& c) const;

private:
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
    std::vector<std::vector<Matrix>> wedges_;
    std::string label_;
    std::optional<Vector> lyapunov_;
};

// JSON: { "m": int, "atoms": [ { "matrix": [[...]], "weight": float } ],
//         optional "label": str, optional "lyapunov": [...] }.
// Matrices must have determinant 1 within 1e-6 and are re-normalized.
MeasureSpec parse_measure_spec(const std::string& text, const std::string& label = {});
MeasureSpec load_measure_spec(const std::filesystem::path& path);
std::string to_json(const MeasureSpec& spec);

// Heuristic screen for Zariski density.
struct DensityReport {
    std::vector<bool> irreducible;  // per exterior degree: words span the full matrix algebra
    bool proximal = false;          // some word has kappa in the open Weyl chamber
    bool dense() const;
};

DensityReport zariski_density_heuristic(const MeasureSpec& spec, int maxWordLength = 6);

}  // namespace flagwalk
