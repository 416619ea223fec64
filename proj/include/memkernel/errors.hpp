#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace memkernel {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class BoundaryIncompatible : public Error {
 public:
  using Error::Error;
};

class AlphaDegenerate : public Error {
 public:
  using Error::Error;
};

class PsiDegenerate : public Error {
 public:
  using Error::Error;
};

class CompatibilityFailed : public Error {
 public:
  using Error::Error;
};

class NonFinite : public Error {
 public:
  NonFinite(const std::string& msg, int step)
      : Error(msg + " at step " + std::to_string(step)), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

class SingularBoundary : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& msg, int iterations, double last_ratio)
      : Error(msg), iterations_(iterations), last_ratio_(last_ratio) {}
  int iterations() const { return iterations_; }
  double last_ratio() const { return last_ratio_; }

 private:
  int iterations_;
  double last_ratio_;
};

}  // namespace memkernel
