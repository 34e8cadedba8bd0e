#include <doctest.h>

#include <sstream>

#include "kglp/graph.hpp"
#include "kglp/stats.hpp"
#include "support.hpp"

using namespace kglp;
using testsupport::StringTriple;

TEST_CASE("parse_triples reads file order and preserves duplicates") {
    Interners interners;
    std::istringstream in("A\tr1\tB\nC\tr1\tB\n");
    auto triples = parse_triples(in, interners, "test");
    REQUIRE(triples.size() == 2);
    CHECK(interners.entities.name(triples[0].head) == "A");
    CHECK(interners.relations.name(triples[0].relation) == "r1");
    CHECK(interners.entities.name(triples[0].tail) == "B");
    CHECK(interners.entities.name(triples[1].head) == "C");
    CHECK(triples[0].tail == triples[1].tail);

    // duplicated line -> duplicated triple, line count == triple count
    std::istringstream dup("A\tr1\tB\nA\tr1\tB\n");
    Interners interners2;
    auto dup_triples = parse_triples(dup, interners2, "test");
    CHECK(dup_triples.size() == 2);
    CHECK(dup_triples[0] == dup_triples[1]);
}

TEST_CASE("parse_triples rejects malformed lines with a line number") {
    Interners interners;
    std::istringstream in("A\tr1\n");
    CHECK_THROWS_WITH_AS(parse_triples(in, interners, "f"),
                         "f:1: expected 3 tab-separated fields", std::runtime_error);

    std::istringstream four("A\tr1\tB\tX\n");
    CHECK_THROWS_AS(parse_triples(four, interners, "f"), std::runtime_error);

    std::istringstream empty("");
    CHECK(parse_triples(empty, interners, "f").empty());
}

TEST_CASE("interning is injective and round-trips surface forms") {
    SymbolTable table;
    auto a = table.intern("alpha");
    auto b = table.intern("beta");
    CHECK(a != b);
    CHECK(table.intern("alpha") == a);
    CHECK(table.name(a) == "alpha");
    CHECK(table.name(b) == "beta");
    CHECK(table.size() == 2);
    CHECK(table.lookup("gamma") == SymbolTable::npos);
}

TEST_CASE("one_hop returns incident triples in insertion order with roles") {
    Interners interners;
    auto triples = testsupport::intern_all({{"A", "r1", "B"}, {"B", "r2", "C"}}, interners);
    KnowledgeGraph graph(triples, interners.entities.size());

    auto hops = graph.one_hop(interners.entities.lookup("B"));
    REQUIRE(hops.size() == 2);
    CHECK(hops[0].triple_index == 0);
    CHECK(hops[0].role == Role::Tail);
    CHECK(hops[1].triple_index == 1);
    CHECK(hops[1].role == Role::Head);

    CHECK_THROWS_AS(graph.one_hop(99), std::runtime_error);
}

TEST_CASE("isolated entity interned from descriptions has an empty neighborhood") {
    Interners interners;
    auto triples = testsupport::intern_all({{"A", "r1", "B"}}, interners);
    interners.entities.intern("desc_only");
    KnowledgeGraph graph(triples, interners.entities.size());
    CHECK(graph.one_hop(interners.entities.lookup("desc_only")).empty());
}

TEST_CASE("duplicate triples keep multiset semantics in neighborhoods") {
    Interners interners;
    auto triples = testsupport::intern_all({{"A", "r1", "B"}, {"A", "r1", "B"}}, interners);
    KnowledgeGraph graph(triples, interners.entities.size());
    CHECK(graph.one_hop(interners.entities.lookup("A")).size() == 2);
}

TEST_CASE("self-loop appears once per role") {
    Interners interners;
    auto triples = testsupport::intern_all({{"A", "r1", "A"}}, interners);
    KnowledgeGraph graph(triples, interners.entities.size());
    auto hops = graph.one_hop(interners.entities.lookup("A"));
    REQUIRE(hops.size() == 2);
    CHECK(hops[0].role == Role::Head);
    CHECK(hops[1].role == Role::Tail);
    CHECK(graph.degree(0) == 2);
}

TEST_CASE("toy stats match the hand-enumerated values") {
    Interners interners;
    auto train =
        testsupport::intern_all({{"A", "r1", "B"}, {"C", "r1", "B"}, {"D", "r2", "E"}}, interners);
    auto stats = compute_stats(train, {}, build_samples(train), build_samples({}));
    CHECK(stats.n_nodes == 5);
    CHECK(stats.n_relations == 2);
    CHECK(stats.n_train_triples == 3);
    CHECK(stats.n_disconnected == 1);  // only (D, r2, E)
    CHECK(stats.avg_one_hop == doctest::Approx(1.2).epsilon(1e-12));
}

TEST_CASE("empty graph yields all-zero stats") {
    auto stats = compute_stats({}, {}, build_samples({}), build_samples({}));
    CHECK(stats.n_nodes == 0);
    CHECK(stats.n_train_triples == 0);
    CHECK(stats.avg_one_hop == 0.0);
    CHECK(stats.avg_labels_per_sample == 0.0);
    CHECK(stats.avg_samples_per_label == 0.0);
}

TEST_CASE("self-loop-only graph is disconnected and has degree 2") {
    Interners interners;
    auto train = testsupport::intern_all({{"A", "r1", "A"}}, interners);
    auto stats = compute_stats(train, {}, build_samples(train), build_samples({}));
    CHECK(stats.n_nodes == 1);
    CHECK(stats.n_disconnected == 1);
    CHECK(stats.avg_one_hop == doctest::Approx(2.0));
}

TEST_CASE("stats equal brute-force recomputation on random graphs") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        auto train_rows = testsupport::random_triples(rng, 50);
        auto test_rows = testsupport::random_triples(rng, 20);
        Interners interners;
        auto train = testsupport::intern_all(train_rows, interners);
        auto test = testsupport::intern_all(test_rows, interners);
        auto stats = compute_stats(train, test, build_samples(train), build_samples(test));
        auto naive = testsupport::naive_stats(train_rows, test_rows);
        CHECK(stats.n_nodes == naive.n_nodes);
        CHECK(stats.n_relations == naive.n_relations);
        CHECK(stats.n_disconnected == naive.n_disconnected);
        CHECK(stats.avg_one_hop == doctest::Approx(naive.avg_one_hop).epsilon(1e-12));

        // degree-sum identity: avg_one_hop * n_nodes == 2 * |train|
        if (stats.n_nodes > 0)
            CHECK(stats.avg_one_hop * static_cast<double>(stats.n_nodes) ==
                  doctest::Approx(2.0 * static_cast<double>(train.size())).epsilon(1e-12));

        // sum over entities of |one_hop(e)| == 2 * |triples|
        KnowledgeGraph graph(train, interners.entities.size());
        std::size_t total = 0;
        for (EntityId e = 0; e < interners.entities.size(); ++e)
            total += graph.one_hop(e).size();
        CHECK(total == 2 * train.size());
    }
}

TEST_CASE("disconnected predicate: removal leaves both endpoints bare") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto rows = testsupport::random_triples(rng, 25);
        Interners interners;
        auto train = testsupport::intern_all(rows, interners);
        KnowledgeGraph graph(train, interners.entities.size());

        std::size_t expected = 0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            bool head_only = true, tail_only = true;
            for (const auto& hop : graph.one_hop(train[i].head))
                if (hop.triple_index != i) head_only = false;
            for (const auto& hop : graph.one_hop(train[i].tail))
                if (hop.triple_index != i) tail_only = false;
            if (head_only && tail_only) ++expected;
        }
        auto stats = compute_stats(train, {}, build_samples(train), build_samples({}));
        CHECK(stats.n_disconnected == expected);
    }
}
