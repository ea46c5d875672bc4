#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ppgf {

// Stable error codes. CLI maps these onto process exit codes
// (config/usage -> 1, data/file -> 2, numeric divergence -> 3).
enum class Errc {
  // data ingestion / preparation
  FileNotFound,
  EmptyFile,
  MalformedRow,
  UnknownColumn,
  NonNumericCell,
  NonFiniteValue,
  BadFractions,
  EmptySplit,
  ZeroVariance,
  KTooSmall,
  TooFewValues,
  ZeroWidthInterval,
  SeriesTooShort,
  LabelOutOfRange,
  EmptyDataset,
  // numeric core
  ShapeMismatch,
  EvenKernelWidth,
  BadHeads,
  NonFiniteTensor,
  NonFiniteLoss,
  NonFiniteGradient,
  BackwardWithoutForward,
  // training / persistence
  TrainDiverged,
  BadMagic,
  BadVersion,
  TruncatedCheckpoint,
  BadDtype,
  SchemeMismatch,
  EmptyGrid,
  UnknownVariant,
  UnknownKind,
  // configuration / misc
  ConfigError,
  UsageError,
  IoError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

template <typename T>
std::string str(const T& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Exit-code classes for the CLI contract.
int exit_code_for(Errc c);

}  // namespace ppgf
