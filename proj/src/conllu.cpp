#include "xfer/conllu.hpp"

#include <sstream>

namespace xfer {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::string::size_type start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

bool is_integer(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace

bool Sentence::labelled() const {
  for (const auto& t : tokens)
    if (!t.head) return false;
  return !tokens.empty();
}

void validate_tree(const Sentence& sentence) {
  const int n = sentence.size();
  int root_children = 0;
  for (int j = 1; j <= n; ++j) {
    const auto& tok = sentence.tokens[j - 1];
    if (!tok.head) continue;
    int h = *tok.head;
    if (h < 0 || h > n)
      throw ConlluError("sentence '" + sentence.id + "': head " +
                        std::to_string(h) + " of token " + std::to_string(j) +
                        " out of range");
    if (h == j)
      throw ConlluError("sentence '" + sentence.id + "': token " +
                        std::to_string(j) + " is its own head");
    if (h == 0) ++root_children;
  }
  if (!sentence.labelled()) return;
  if (root_children != 1)
    throw ConlluError("sentence '" + sentence.id + "': expected exactly one "
                      "child of the root, found " +
                      std::to_string(root_children));
  // Cycle check: every token must reach node 0.
  for (int j = 1; j <= n; ++j) {
    int cur = j;
    int steps = 0;
    while (cur != 0) {
      cur = *sentence.tokens[cur - 1].head;
      if (++steps > n)
        throw ConlluError("sentence '" + sentence.id +
                          "': cyclic gold heads involving token " +
                          std::to_string(j));
    }
  }
}

Corpus parse_conllu(const std::string& text) {
  Corpus corpus;
  Sentence cur;
  bool in_sentence = false;
  int line_no = 0;
  int auto_id = 0;

  auto flush = [&]() {
    if (!in_sentence) return;
    if (cur.tokens.empty())
      throw ConlluError("empty sentence block ending at line " +
                        std::to_string(line_no));
    if (cur.id.empty()) cur.id = std::to_string(++auto_id);
    validate_tree(cur);
    corpus.sentences.push_back(std::move(cur));
    cur = Sentence{};
    in_sentence = false;
  };

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const std::string key = "# sent_id =";
      if (line.rfind(key, 0) == 0) {
        std::string v = line.substr(key.size());
        while (!v.empty() && v.front() == ' ') v.erase(v.begin());
        cur.id = v;
      }
      in_sentence = true;
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() != 10)
      throw ConlluError("line " + std::to_string(line_no) + ": expected 10 "
                        "columns, got " + std::to_string(cols.size()));
    const std::string& id_col = cols[0];
    // Multiword token ranges (1-2) and empty nodes (1.1) are skipped.
    if (id_col.find('-') != std::string::npos ||
        id_col.find('.') != std::string::npos) {
      in_sentence = true;
      continue;
    }
    if (!is_integer(id_col))
      throw ConlluError("line " + std::to_string(line_no) +
                        ": malformed token id '" + id_col + "'");
    Token tok;
    tok.form = cols[1];
    tok.upos = cols[3];
    if (cols[6] != "_") {
      if (!is_integer(cols[6]))
        throw ConlluError("line " + std::to_string(line_no) +
                          ": non-integer HEAD '" + cols[6] + "'");
      tok.head = std::stoi(cols[6]);
      if (cols[7] == "_")
        throw ConlluError("line " + std::to_string(line_no) +
                          ": HEAD present but DEPREL missing");
      tok.deprel = cols[7];
    }
    cur.tokens.push_back(std::move(tok));
    in_sentence = true;
  }
  flush();

  // Ids must be unique across the corpus.
  for (size_t a = 0; a < corpus.sentences.size(); ++a)
    for (size_t b = a + 1; b < corpus.sentences.size(); ++b)
      if (corpus.sentences[a].id == corpus.sentences[b].id)
        throw ConlluError("duplicate sentence id '" + corpus.sentences[a].id +
                          "'");
  return corpus;
}

std::string write_conllu(const Corpus& corpus) {
  std::string out;
  for (const auto& sent : corpus.sentences) {
    if (!sent.id.empty()) {
      out += "# sent_id = " + sent.id + "\n";
    }
    int j = 0;
    for (const auto& tok : sent.tokens) {
      ++j;
      out += std::to_string(j);
      out += '\t';
      out += tok.form.empty() ? "_" : tok.form;
      out += "\t_\t";
      out += tok.upos.empty() ? "_" : tok.upos;
      out += "\t_\t_\t";
      out += tok.head ? std::to_string(*tok.head) : "_";
      out += '\t';
      out += tok.deprel ? *tok.deprel : "_";
      out += "\t_\t_\n";
    }
    out += '\n';
  }
  return out;
}

}  // namespace xfer
