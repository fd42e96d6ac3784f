#pragma once

#include <cstddef>
#include <vector>

namespace compolicy {

// Dense row-major matrix.  Sized for the small design matrices this project
// works with (hundreds of rows, tens of columns), so the implementation
// favours clarity over blocking.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }
  double operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * cols_ + j];
  }

  double* row_ptr(int i) { return data_.data() + static_cast<std::size_t>(i) * cols_; }
  const double* row_ptr(int i) const {
    return data_.data() + static_cast<std::size_t>(i) * cols_;
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  int rows_, cols_;
  std::vector<double> data_;
};

// y = M v.
std::vector<double> mat_vec(const Matrix& m, const std::vector<double>& v);

// Householder QR least-squares solve of min ||X b - y||.  Throws
// NumericalError naming the first dependent column when a diagonal pivot
// falls below 1e-10.
std::vector<double> qr_solve(const Matrix& x, const std::vector<double>& y);

// Inverse of the symmetric positive definite k x k matrix a (row-major).
// Throws NumericalError if a pivot collapses.
std::vector<double> spd_inverse(const std::vector<double>& a, int k);

// Symmetric eigendecomposition by cyclic Jacobi rotations.  Fills
// eigenvalues (ascending order not guaranteed) and eigenvectors as columns of
// vecs (row-major k x k).
void sym_eigen(const std::vector<double>& a, int k, std::vector<double>& vals,
               std::vector<double>& vecs);

// Symmetric square root of a positive semidefinite matrix: eigenvalues below
// zero are clipped to zero before taking square roots.
std::vector<double> sym_sqrt_psd(const std::vector<double>& a, int k);

}  // namespace compolicy
