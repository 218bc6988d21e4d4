#pragma once

#include <stdexcept>
#include <string>

namespace numclust {

// Common base so callers can catch everything this library throws with one handler.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimMismatch : public Error {
 public:
  using Error::Error;
};

// Cholesky failed even after the ridge escalation ladder.
class NotSpd : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class EmptySubset : public Error {
 public:
  using Error::Error;
};

class TooManyClusters : public Error {
 public:
  using Error::Error;
};

// EM collapsed: a component lost all its mass and could not be rescued.
class Degenerate : public Error {
 public:
  using Error::Error;
};

class InvalidCluster : public Error {
 public:
  using Error::Error;
};

class ZeroVariance : public Error {
 public:
  using Error::Error;
};

class UnknownCriterion : public Error {
 public:
  using Error::Error;
};

class NoValidCandidate : public Error {
 public:
  using Error::Error;
};

class AllCandidatesInvalid : public Error {
 public:
  using Error::Error;
};

class CurveTooShort : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ZeroMeanColumn : public Error {
 public:
  using Error::Error;
};

}  // namespace numclust
