#pragma once

#include <stdexcept>
#include <string>

namespace lidarpaint {

/// Rejected input: a precondition or invariant on caller-supplied data failed.
class InputError : public std::invalid_argument {
  public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed file contents. Message carries the byte offset where known.
class FormatError : public std::runtime_error {
  public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Pipeline stage failure; `stage` names the stage that aborted.
class StageError : public std::runtime_error {
  public:
    StageError(std::string stage_name, const std::string& what)
        : std::runtime_error("[" + stage_name + "] " + what),
          stage(std::move(stage_name)) {}

    std::string stage;
};

}  // namespace lidarpaint
