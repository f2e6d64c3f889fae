#ifndef READABILITY_ERROR_HPP
#define READABILITY_ERROR_HPP

#include <stdexcept>
#include <string>

namespace readability {

// Base for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files (corpus, embeddings, model containers).
class ParseError : public Error {
public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Bad run configuration (missing keys, invalid values). CLI maps this to exit 2.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Every token of a document was out-of-vocabulary or a stopword; the
// document has no mass distribution and cannot participate in WMD.
class AllTokensDropped : public Error {
public:
  explicit AllTokensDropped(std::string doc_id)
      : Error("all tokens dropped (OOV or stopword) for document '" + doc_id + "'"),
        doc_id_(std::move(doc_id)) {}
  const std::string& doc_id() const { return doc_id_; }

private:
  std::string doc_id_;
};

// Transport solver exceeded its pivot cap.
class SolverLimitError : public Error {
public:
  SolverLimitError(std::size_t cap, const std::string& context)
      : Error("transport solver exceeded pivot cap of " + std::to_string(cap) +
              (context.empty() ? "" : " (" + context + ")")),
        cap_(cap) {}
  std::size_t cap() const { return cap_; }

private:
  std::size_t cap_;
};

} // namespace readability

#endif
