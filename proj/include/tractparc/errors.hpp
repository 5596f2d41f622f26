#pragma once

#include <stdexcept>
#include <string>

namespace tractparc {

// Base type for every error thrown by the toolkit. Catching this is enough
// to turn any library failure into a diagnostic + nonzero exit.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidStreamline : Error { using Error::Error; };
struct ShapeMismatch    : Error { using Error::Error; };
struct EmptyTractogram  : Error { using Error::Error; };
struct SpaceMismatch    : Error { using Error::Error; };

// trk / jsonl I/O
struct NotATrkFile      : Error { using Error::Error; };
struct UnsupportedTrk   : Error { using Error::Error; };
struct TruncatedFile    : Error { using Error::Error; };
struct CorruptRecord    : Error { using Error::Error; };
struct BadTransform     : Error { using Error::Error; };
struct ParseError       : Error { using Error::Error; };

// labels / datasets
struct LabelOutOfRange  : Error { using Error::Error; };
struct MissingLabel     : Error { using Error::Error; };
struct IndexOutOfRange  : Error { using Error::Error; };
struct EmptyInput       : Error { using Error::Error; };
struct EmptyDataset     : Error { using Error::Error; };
struct NonFiniteInput   : Error { using Error::Error; };
struct InvalidSpec      : Error { using Error::Error; };

}  // namespace tractparc
