#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "r3/text/embeddings.hpp"
#include "r3/text/tokenizer.hpp"

using namespace r3::text;

TEST_CASE("tokenize lowercases and peels edge punctuation") {
  CHECK(tokenize("Who is the King of France?") == Tokens{"who", "is", "the", "king", "of", "france", "?"});
  CHECK(tokenize("(Paris), 104,688 U.S. people") ==
        Tokens{"(", "paris", ")", ",", "104,688", "u.s", ".", "people"});
  CHECK(tokenize("   ").empty());
  CHECK(tokenize("...") == Tokens{".", ".", "."});
}

TEST_CASE("join and find_all") {
  const Tokens t = {"a", "b", "a", "b", "a"};
  CHECK(join(t, 1, 3) == "b a");
  CHECK(join(t) == "a b a b a");
  CHECK(find_all(t, {"a", "b"}) == std::vector<std::size_t>{0, 2});
  CHECK(find_all(t, {"a"}) == std::vector<std::size_t>{0, 2, 4});
  CHECK(find_all(t, {}).empty());
  CHECK(find_all({"a"}, {"a", "b"}).empty());
}

TEST_CASE("embedding file loading skips malformed and duplicate lines") {
  const auto path = (std::filesystem::temp_directory_path() / "r3_unit_vectors.txt").string();
  {
    std::ofstream out(path);
    out << "king 1 2 3\n"
        << "queen 4 5\n"      // too short
        << "king 9 9 9\n"     // duplicate
        << "rook 1 x 3\n"     // not a number
        << "pawn 0.5 -1 2\n";
  }
  EmbeddingTable::LoadStats stats;
  const auto table = EmbeddingTable::load(path, 3, &stats);
  CHECK(stats.loaded == 2);
  CHECK(stats.malformed == 2);
  CHECK(stats.duplicates == 1);
  CHECK(table.contains("king"));
  CHECK_FALSE(table.contains("queen"));
  CHECK(table.vector("king")(2) == 3.0);
  CHECK(table.vector("absent").isZero());

  const auto m = embed(table.index({"pawn", "absent", "king"}), table);
  CHECK(m.rows() == 3);
  CHECK(m.cols() == 3);
  CHECK(m(1, 0) == -1.0);
  CHECK(m.col(1).isZero());
  CHECK_THROWS_AS(embed(table.index({}), table), std::invalid_argument);

  std::ofstream(path) << "bad line\n";
  CHECK_THROWS(EmbeddingTable::load(path, 3));
  std::filesystem::remove(path);
  CHECK_THROWS(EmbeddingTable::load(path, 3));
}

TEST_CASE("synthetic embeddings are deterministic per token and seed") {
  const auto a = EmbeddingTable::synthetic(8, 7);
  const auto b = EmbeddingTable::synthetic(8, 7);
  const auto c = EmbeddingTable::synthetic(8, 8);
  CHECK(a.vector("river") == b.vector("river"));
  CHECK(a.vector("river") != a.vector("stone"));
  CHECK(a.vector("river") != c.vector("river"));
  CHECK(a.contains("anything"));
  CHECK(a.vector("river").size() == 8);
}
