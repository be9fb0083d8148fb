#include <fstream>
#include <sstream>

#include "magmcmc/errors.hpp"
#include "magmcmc/target.hpp"

namespace magmcmc {

namespace {

std::vector<Index> parse_team(const std::string& field, std::size_t line_no) {
  std::vector<Index> team;
  std::stringstream ss(field);
  std::string token;
  while (std::getline(ss, token, ';')) {
    if (token.empty()) continue;
    std::size_t used = 0;
    long value = 0;
    try {
      value = std::stol(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size())
      throw Error("games csv line " + std::to_string(line_no) + ": bad player index '" + token + "'");
    team.push_back(static_cast<Index>(value));
  }
  return team;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Matrix read_adjacency_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open adjacency file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double v = 0.0;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw Error("adjacency file " + path.string() + ": non-numeric entry");
    if (!row.empty()) rows.push_back(std::move(row));
  }
  const auto n = static_cast<Index>(rows.size());
  if (n == 0) throw Error("adjacency file " + path.string() + " is empty");
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i) {
    if (static_cast<Index>(rows[i].size()) != n)
      throw Error("adjacency file " + path.string() + ": matrix is not square");
    for (Index j = 0; j < n; ++j) out(i, j) = rows[i][j];
  }
  return out;
}

std::vector<Game> read_games_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open games file " + path.string());
  std::vector<Game> games;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (fields.size() != 3)
      throw Error("games csv line " + std::to_string(line_no) + ": expected 3 columns");
    if (line_no == 1 && fields[0] == "teamA") continue;
    Game g;
    g.team_a = parse_team(fields[0], line_no);
    g.team_b = parse_team(fields[1], line_no);
    if (fields[2] == "1")
      g.winner_a = true;
    else if (fields[2] == "0")
      g.winner_a = false;
    else
      throw Error("games csv line " + std::to_string(line_no) + ": winnerA must be 0 or 1");
    games.push_back(std::move(g));
  }
  return games;
}

}  // namespace magmcmc
