#pragma once

#include <stdexcept>
#include <string>

namespace numcodec {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A requested parameter is out of range or inapplicable (bad level, page
// size, mode override for the wrong kind, empty input, ...).
struct InvalidConfig : Error {
  using Error::Error;
};

// A mode was asked to split/join numbers of a kind it does not support.
struct InvalidModeForData : Error {
  using Error::Error;
};

// Latent variable sequences are inconsistent with the mode they claim to
// belong to (missing secondary, length mismatch).
struct CorruptLatents : Error {
  using Error::Error;
};

// Chunk metadata failed structural validation.
struct CorruptMetadata : Error {
  using Error::Error;
};

// Page payload failed validation or the bitstream ended early.
struct CorruptPage : Error {
  using Error::Error;
};

// Internal invariant violated, e.g. a latent that falls outside every bin
// during encoding.
struct CorruptState : Error {
  using Error::Error;
};

// The container was written by a newer format version than this build.
struct UnsupportedVersion : Error {
  using Error::Error;
};

}  // namespace numcodec
