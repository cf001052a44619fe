#include "apfree/embeddings.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <numeric>

namespace apfree {

namespace mp = boost::multiprecision;
using BigRat = mp::cpp_rational;

void Support::validate() const {
  if (alphabet_sizes.size() < 2) throw std::invalid_argument("Support: arity must be >= 2");
  for (int s : alphabet_sizes)
    if (s < 1) throw std::invalid_argument("Support: empty alphabet");
  if (atoms.empty()) throw std::invalid_argument("Support: empty support");
  for (const auto& atom : atoms) {
    if (atom.size() != alphabet_sizes.size())
      throw std::invalid_argument("Support: atom arity mismatch");
    for (size_t c = 0; c < atom.size(); ++c)
      if (atom[c] < 0 || atom[c] >= alphabet_sizes[c])
        throw std::invalid_argument("Support: atom letter out of alphabet range");
  }
}

bool EmbeddingCertificate::is_trivial() const {
  for (const auto& table : maps)
    for (const auto& v : table)
      if (v != table.front()) return false;
  return true;
}

RelationLattice::RelationLattice(const Support& support) {
  support.validate();
  const int k = support.arity();
  offsets_.resize(k);
  block_sizes_ = support.alphabet_sizes;
  int off = 0;
  for (int c = 0; c < k; ++c) {
    offsets_[c] = off;
    off += support.alphabet_sizes[c];
  }
  cols_ = off;
  matrix_.reserve(support.atoms.size());
  for (const auto& atom : support.atoms) {
    std::vector<BigInt> row(cols_, 0);
    for (int c = 0; c < k; ++c) row[offsets_[c] + atom[c]] = 1;
    matrix_.push_back(std::move(row));
  }
}

namespace {

// Row echelon form over Q; returns pivot column per pivot row.
std::vector<int> rational_echelon(std::vector<std::vector<BigRat>>& m) {
  std::vector<int> pivots;
  const int rows = static_cast<int>(m.size());
  const int cols = rows ? static_cast<int>(m[0].size()) : 0;
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int sel = -1;
    for (int i = r; i < rows; ++i)
      if (m[i][c] != 0) {
        sel = i;
        break;
      }
    if (sel < 0) continue;
    std::swap(m[r], m[sel]);
    const BigRat inv = m[r][c];
    for (int j = c; j < cols; ++j) m[r][j] /= inv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      const BigRat factor = m[i][c];
      for (int j = c; j < cols; ++j) m[i][j] -= factor * m[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

std::vector<std::vector<BigRat>> to_rational(const RelationLattice& lattice) {
  std::vector<std::vector<BigRat>> m(lattice.rows(), std::vector<BigRat>(lattice.cols()));
  for (int i = 0; i < lattice.rows(); ++i)
    for (int j = 0; j < lattice.cols(); ++j) m[i][j] = BigRat(lattice.matrix()[i][j]);
  return m;
}

// Kernel basis over Q from the echelon form, one vector per free column.
std::vector<std::vector<BigRat>> rational_kernel(const RelationLattice& lattice) {
  auto m = to_rational(lattice);
  const std::vector<int> pivots = rational_echelon(m);
  const int cols = lattice.cols();
  std::vector<char> is_pivot(cols, 0);
  for (int c : pivots) is_pivot[c] = 1;
  std::vector<std::vector<BigRat>> basis;
  for (int free_col = 0; free_col < cols; ++free_col) {
    if (is_pivot[free_col]) continue;
    std::vector<BigRat> v(cols, BigRat(0));
    v[free_col] = 1;
    for (size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m[r][free_col];
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<BigInt> clear_denominators(const std::vector<BigRat>& v) {
  BigInt lcm = 1;
  for (const BigRat& x : v) lcm = mp::lcm(lcm, BigInt(mp::denominator(x)));
  std::vector<BigInt> out(v.size());
  BigInt g = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    out[i] = BigInt(mp::numerator(v[i])) * (lcm / BigInt(mp::denominator(v[i])));
    g = mp::gcd(g, out[i]);
  }
  if (g > 1)
    for (BigInt& x : out) x /= g;
  return out;
}

bool blockwise_constant(const std::vector<BigRat>& v, const RelationLattice& lattice) {
  for (size_t c = 0; c < lattice.block_sizes().size(); ++c) {
    const int off = lattice.block_offset(int(c));
    for (int l = 1; l < lattice.block_sizes()[c]; ++l)
      if (v[off + l] != v[off]) return false;
  }
  return true;
}

EmbeddingCertificate certificate_from_columns(const std::vector<BigInt>& cols_vec,
                                              const RelationLattice& lattice,
                                              std::vector<int> target_orders) {
  EmbeddingCertificate cert;
  cert.target_orders = std::move(target_orders);
  const int k = static_cast<int>(lattice.block_sizes().size());
  cert.maps.resize(k);
  for (int c = 0; c < k; ++c) {
    const int off = lattice.block_offset(c);
    for (int l = 0; l < lattice.block_sizes()[c]; ++l) {
      BigInt v = cols_vec[off + l];
      if (!cert.target_orders.empty()) {
        const BigInt mod = cert.target_orders[0];
        v %= mod;
        if (v < 0) v += mod;
      }
      cert.maps[c].push_back({v});
    }
  }
  return cert;
}

}  // namespace

int lattice_rank(const RelationLattice& lattice) {
  auto m = to_rational(lattice);
  return static_cast<int>(rational_echelon(m).size());
}

int lattice_rank_mod(const RelationLattice& lattice, int prime) {
  if (!is_prime(prime) && prime != 2) throw std::invalid_argument("lattice_rank_mod: bad prime");
  std::vector<std::vector<int>> m(lattice.rows(), std::vector<int>(lattice.cols()));
  for (int i = 0; i < lattice.rows(); ++i)
    for (int j = 0; j < lattice.cols(); ++j)
      m[i][j] = static_cast<int>(lattice.matrix()[i][j] % prime);
  int rank = 0;
  const int rows = lattice.rows(), cols = lattice.cols();
  for (int c = 0; c < cols && rank < rows; ++c) {
    int sel = -1;
    for (int i = rank; i < rows; ++i)
      if (m[i][c] % prime != 0) {
        sel = i;
        break;
      }
    if (sel < 0) continue;
    std::swap(m[rank], m[sel]);
    // modular inverse by Fermat
    auto pow_mod = [&](long long b, long long e) {
      long long r = 1;
      b %= prime;
      for (; e; e >>= 1, b = b * b % prime)
        if (e & 1) r = r * b % prime;
      return r;
    };
    const long long inv = pow_mod(m[rank][c], prime - 2);
    for (int j = c; j < cols; ++j) m[rank][j] = static_cast<int>(m[rank][j] * inv % prime);
    for (int i = 0; i < rows; ++i) {
      if (i == rank || m[i][c] == 0) continue;
      const int factor = m[i][c];
      for (int j = c; j < cols; ++j)
        m[i][j] = ((m[i][j] - factor * m[rank][j]) % prime + prime) % prime;
    }
    ++rank;
  }
  return rank;
}

ZEmbeddingResult z_embedding(const Support& support) {
  const RelationLattice lattice(support);
  const auto basis = rational_kernel(lattice);
  ZEmbeddingResult res;
  res.kernel_dimension = static_cast<int>(basis.size());
  res.trivial_dimension = support.arity() - 1;
  if (res.kernel_dimension <= res.trivial_dimension) return res;
  // Some kernel vector must vary within a block; otherwise the kernel
  // would consist of constant solutions only and have dimension k-1.
  for (const auto& v : basis) {
    if (blockwise_constant(v, lattice)) continue;
    EmbeddingCertificate cert = certificate_from_columns(clear_denominators(v), lattice, {});
    if (!verify_certificate(cert, support))
      throw std::logic_error("z_embedding: internal certificate verification failed");
    res.certificate = std::move(cert);
    return res;
  }
  throw std::logic_error("z_embedding: kernel dimension exceeds trivial space but no witness");
}

namespace {

// Smith normal form of a (tracking the row transform u with u_out * a_in = rows of result
// under column ops). After the call, a is diagonal with divisibility.
void smith_normal_form(std::vector<std::vector<BigInt>>& a, std::vector<std::vector<BigInt>>& u) {
  const int rows = static_cast<int>(a.size());
  const int cols = rows ? static_cast<int>(a[0].size()) : 0;
  u.assign(rows, std::vector<BigInt>(rows, 0));
  for (int i = 0; i < rows; ++i) u[i][i] = 1;

  auto row_swap = [&](int i, int j) {
    std::swap(a[i], a[j]);
    std::swap(u[i], u[j]);
  };
  auto row_add = [&](int dst, int src, const BigInt& c) {
    for (int t = 0; t < cols; ++t) a[dst][t] += c * a[src][t];
    for (int t = 0; t < rows; ++t) u[dst][t] += c * u[src][t];
  };
  auto row_neg = [&](int i) {
    for (int t = 0; t < cols; ++t) a[i][t] = -a[i][t];
    for (int t = 0; t < rows; ++t) u[i][t] = -u[i][t];
  };
  auto col_swap = [&](int i, int j) {
    for (int r = 0; r < rows; ++r) std::swap(a[r][i], a[r][j]);
  };
  auto col_add = [&](int dst, int src, const BigInt& c) {
    for (int r = 0; r < rows; ++r) a[r][dst] += c * a[r][src];
  };
  auto col_neg = [&](int i) {
    for (int r = 0; r < rows; ++r) a[r][i] = -a[r][i];
  };

  const int steps = std::min(rows, cols);
  for (int k = 0; k < steps; ++k) {
    // Find a nonzero pivot in the trailing block.
    int pr = -1, pc = -1;
    for (int i = k; i < rows && pr < 0; ++i)
      for (int j = k; j < cols; ++j)
        if (a[i][j] != 0) {
          pr = i;
          pc = j;
          break;
        }
    if (pr < 0) break;
    row_swap(k, pr);
    col_swap(k, pc);

    // Clear row k and column k by gcd reduction.
    bool dirty = true;
    while (dirty) {
      dirty = false;
      for (int i = k + 1; i < rows; ++i) {
        if (a[i][k] == 0) continue;
        const BigInt q = a[i][k] / a[k][k];
        row_add(i, k, -q);
        if (a[i][k] != 0) {
          row_swap(k, i);
          dirty = true;
        }
      }
      for (int j = k + 1; j < cols; ++j) {
        if (a[k][j] == 0) continue;
        const BigInt q = a[k][j] / a[k][k];
        col_add(j, k, -q);
        if (a[k][j] != 0) {
          col_swap(k, j);
          dirty = true;
        }
      }
    }
    if (a[k][k] < 0) {
      row_neg(k);
    }
    // Enforce divisibility d_k | d_{k+1..}: fold offending entries in.
    for (int i = k + 1; i < rows; ++i) {
      for (int j = k + 1; j < cols; ++j) {
        if (a[i][j] % a[k][k] != 0) {
          col_add(k, j, 1);
          // redo the clearing for this pivot
          bool d2 = true;
          while (d2) {
            d2 = false;
            for (int r2 = k + 1; r2 < rows; ++r2) {
              if (a[r2][k] == 0) continue;
              const BigInt q = a[r2][k] / a[k][k];
              row_add(r2, k, -q);
              if (a[r2][k] != 0) {
                row_swap(k, r2);
                d2 = true;
              }
            }
            for (int c2 = k + 1; c2 < cols; ++c2) {
              if (a[k][c2] == 0) continue;
              const BigInt q = a[k][c2] / a[k][k];
              col_add(c2, k, -q);
              if (a[k][c2] != 0) {
                col_swap(k, c2);
                d2 = true;
              }
            }
          }
          if (a[k][k] < 0) row_neg(k);
          i = k;  // restart the divisibility scan
          break;
        }
      }
    }
  }
  (void)col_neg;
}

}  // namespace

UniversalEmbeddingResult universal_finite_embedding(const Support& support) {
  const RelationLattice lattice(support);
  // Work with A = M^T (columns of the relation matrix become rows), so the
  // solution cokernel Z^cols / rowspace(M) is coker(A) with A acting on
  // the unknowns.
  const int rows = lattice.cols();
  const int cols = lattice.rows();
  std::vector<std::vector<BigInt>> a(rows, std::vector<BigInt>(cols));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a[i][j] = lattice.matrix()[j][i];

  std::vector<std::vector<BigInt>> u;
  smith_normal_form(a, u);

  UniversalEmbeddingResult res;
  const int steps = std::min(rows, cols);
  int nonzero_diag = 0;
  for (int k = 0; k < steps; ++k)
    if (a[k][k] != 0) ++nonzero_diag;
  res.free_rank = rows - nonzero_diag;

  for (int k = 0; k < steps; ++k) {
    const BigInt d = a[k][k];
    if (d > 1) {
      res.invariant_factors.push_back(d);
      // Row k of U gives the map Z^cols -> Z_d killing the relation image.
      const int di = static_cast<int>(d);
      res.generators.push_back(certificate_from_columns(u[k], lattice, {di}));
      if (!verify_certificate(res.generators.back(), support))
        throw std::logic_error("universal_finite_embedding: generator fails verification");
    }
  }
  return res;
}

bool verify_certificate(const EmbeddingCertificate& cert, const Support& support) {
  support.validate();
  const int k = support.arity();
  if (static_cast<int>(cert.maps.size()) != k) return false;
  for (int c = 0; c < k; ++c)
    if (static_cast<int>(cert.maps[c].size()) != support.alphabet_sizes[c]) return false;
  const size_t comps = cert.target_orders.empty() ? 1 : cert.target_orders.size();
  for (const auto& atom : support.atoms) {
    for (size_t j = 0; j < comps; ++j) {
      BigInt sum = 0;
      for (int c = 0; c < k; ++c) {
        const auto& v = cert.maps[c][atom[c]];
        if (v.size() != comps) return false;
        sum += v[j];
      }
      if (cert.target_orders.empty()) {
        if (sum != 0) return false;
      } else {
        if (sum % cert.target_orders[j] != 0) return false;
      }
    }
  }
  return true;
}

}  // namespace apfree
