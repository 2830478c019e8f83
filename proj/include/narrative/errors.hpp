#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace narrative {

// Story documents

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string offending_id, const std::string& msg)
      : std::runtime_error(msg + " (" + offending_id + ")"), id_(std::move(offending_id)) {}
  const std::string& offending_id() const noexcept { return id_; }

 private:
  std::string id_;
};

// Engine

class NotApplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReplayError : public std::runtime_error {
 public:
  ReplayError(std::size_t index, const std::string& reason)
      : std::runtime_error("action " + std::to_string(index) + ": " + reason), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class TerminalState : public std::runtime_error {
 public:
  TerminalState() : std::runtime_error("state is terminal") {}
};

// Learner

class EmptyActionSet : public std::invalid_argument {
 public:
  EmptyActionSet() : std::invalid_argument("empty action set") {}
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DemonstrationMismatch : public std::runtime_error {
 public:
  DemonstrationMismatch(std::string trace_id, std::size_t index)
      : std::runtime_error("demonstration " + trace_id + " pair " + std::to_string(index) +
                           ": action not applicable"),
        trace_id_(std::move(trace_id)),
        index_(index) {}
  const std::string& trace_id() const noexcept { return trace_id_; }
  std::size_t index() const noexcept { return index_; }

 private:
  std::string trace_id_;
  std::size_t index_;
};

// Evaluation

class EmptyGroup : public std::invalid_argument {
 public:
  explicit EmptyGroup(const std::string& group_id)
      : std::invalid_argument("group " + group_id + " has no members") {}
};

// Sessions

class UnknownSession : public std::runtime_error {
 public:
  explicit UnknownSession(const std::string& id) : std::runtime_error("unknown session " + id) {}
};

class SessionFinished : public std::runtime_error {
 public:
  explicit SessionFinished(const std::string& id) : std::runtime_error("session " + id + " is finished") {}
};

class InvalidChoice : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace narrative
