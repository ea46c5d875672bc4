#include "ppgf/common.hpp"

namespace ppgf {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::UnknownColumn: return "UnknownColumn";
    case Errc::NonNumericCell: return "NonNumericCell";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::BadFractions: return "BadFractions";
    case Errc::EmptySplit: return "EmptySplit";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::KTooSmall: return "KTooSmall";
    case Errc::TooFewValues: return "TooFewValues";
    case Errc::ZeroWidthInterval: return "ZeroWidthInterval";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EvenKernelWidth: return "EvenKernelWidth";
    case Errc::BadHeads: return "BadHeads";
    case Errc::NonFiniteTensor: return "NonFiniteTensor";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::NonFiniteGradient: return "NonFiniteGradient";
    case Errc::BackwardWithoutForward: return "BackwardWithoutForward";
    case Errc::TrainDiverged: return "TrainDiverged";
    case Errc::BadMagic: return "BadMagic";
    case Errc::BadVersion: return "BadVersion";
    case Errc::TruncatedCheckpoint: return "TruncatedCheckpoint";
    case Errc::BadDtype: return "BadDtype";
    case Errc::SchemeMismatch: return "SchemeMismatch";
    case Errc::EmptyGrid: return "EmptyGrid";
    case Errc::UnknownVariant: return "UnknownVariant";
    case Errc::UnknownKind: return "UnknownKind";
    case Errc::ConfigError: return "ConfigError";
    case Errc::UsageError: return "UsageError";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::FileNotFound:
    case Errc::EmptyFile:
    case Errc::MalformedRow:
    case Errc::UnknownColumn:
    case Errc::NonNumericCell:
    case Errc::NonFiniteValue:
    case Errc::BadFractions:
    case Errc::EmptySplit:
    case Errc::ZeroVariance:
    case Errc::KTooSmall:
    case Errc::TooFewValues:
    case Errc::ZeroWidthInterval:
    case Errc::SeriesTooShort:
    case Errc::LabelOutOfRange:
    case Errc::EmptyDataset:
    case Errc::BadMagic:
    case Errc::BadVersion:
    case Errc::TruncatedCheckpoint:
    case Errc::BadDtype:
    case Errc::SchemeMismatch:
      return 2;
    case Errc::TrainDiverged:
    case Errc::NonFiniteLoss:
    case Errc::NonFiniteGradient:
    case Errc::NonFiniteTensor:
      return 3;
    default:
      return 1;
  }
}

}  // namespace ppgf
