#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace pqmc {

// Base-2 digital net parameters; n = 2^m points in [0,1)^d.
struct NetParams {
    int t = 0;
    int m = 0;
    int d = 1;
};

enum class Scramble { none, nested_uniform, linear_matrix_shift };

const char* scramble_name(Scramble s);

// A block of n = 2^m points in [0,1)^d. `bits` holds the 53-bit fixed-point
// digits of each coordinate (row-major), which elementary-interval counting
// and further scrambling operate on exactly; `points` is the double image.
struct PointSet {
    int m = 0;
    int d = 1;
    Scramble scramble = Scramble::none;
    uint64_t seed = 0;
    std::vector<uint64_t> bits;
    std::vector<double> points;

    size_t n() const { return size_t(1) << m; }
    double at(size_t i, int j) const { return points[i * static_cast<size_t>(d) + j]; }
};

// Sobol' direction numbers in the Joe-Kuo file format: a header line, then
// one row `d s a m_1..m_s` per dimension starting at d=2. Dimension 1 is the
// built-in van der Corput sequence.
class DirectionTable {
  public:
    static DirectionTable load_file(const std::string& path);

    int max_dim() const { return 1 + static_cast<int>(rows_.size()); }

    // 53-bit direction integers for dimensions 1..dim, digit-major:
    // entry [t*dim + j] is digit row t (0-based) of dimension j+1.
    std::vector<uint64_t> direction_integers(int dim) const;

  private:
    struct Row {
        int s = 0;
        uint64_t a = 0;
        std::vector<uint64_t> m;
    };
    std::vector<Row> rows_;
};

// Resolve the bundled direction-number file: $PQMC_DATA_DIR if set, else the
// source-tree data directory baked in at build time.
std::string bundled_direction_file();
const DirectionTable& joe_kuo_table();

// First 2^m Sobol' points in natural index order, unscrambled.
// Dimension 1 is the base-2 radical inverse of the index.
PointSet generate_sobol(int m, int d, const DirectionTable& table);
PointSet generate_sobol(int m, int d);

// Randomize a point set. Both kinds preserve the (t,m,d)-net property of the
// input and make every point marginally uniform; output has 53 random bits
// per coordinate plus center-of-cell placement so no coordinate is 0 or 1.
PointSet scramble(const PointSet& ps, Scramble kind, uint64_t seed);

}  // namespace pqmc
