#ifndef XFER_CONLLU_HPP
#define XFER_CONLLU_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xfer {

class ConlluError : public std::runtime_error {
 public:
  explicit ConlluError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Token {
  std::string form;
  std::string upos;
  std::optional<int> head;           // 0 = virtual root
  std::optional<std::string> deprel; // present iff head present

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
  bool labelled() const;

  bool operator==(const Sentence&) const = default;
};

struct Corpus {
  std::vector<Sentence> sentences;

  bool operator==(const Corpus&) const = default;
};

// Throws ConlluError if the gold heads do not form a tree rooted at the
// virtual node 0 with exactly one child of node 0.
void validate_tree(const Sentence& sentence);

Corpus parse_conllu(const std::string& text);
std::string write_conllu(const Corpus& corpus);

}  // namespace xfer

#endif
