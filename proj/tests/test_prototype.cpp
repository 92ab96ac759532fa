#include <doctest.h>

#include <stdexcept>

#include "creagentive/prototype.hpp"
#include "oracle.hpp"

using namespace creagentive;

namespace {

template <typename Fn>
Errc thrown(Fn&& fn) {
  try {
    fn();
  } catch (const EngineError& e) {
    return e.code();
  }
  throw std::logic_error("expected EngineError");
}

StoryPrototype sample_proto() {
  StoryPrototype p;
  StoryMeta m;
  m.title = "Harbor Lights";
  m.background = "A port town after the war.";
  m.long_term_goal = "Expose the smuggling ring.";
  p.set_meta(m);
  auto c1 = p.add_character("Ava", {{"occupation", "detective"}}, 0);
  auto c2 = p.add_character("Brek", {}, 0);
  auto s1 = p.add_scene("harbor", "night", "fog over the piers", 0);
  p.add_event(0, "Ava arrives by ferry", {"suspicion raised"},
              {{c1, "wary", 0.2}, {c2, "eager", 0.5}}, s1);
  p.upsert_relationship(c1, c2, "alliance", 0.4, Direction::mutual, 0);
  p.snapshot_chapter(0);
  return p;
}

bool has_code(const ValidationReport& r, const std::string& code) {
  for (const auto& v : r)
    if (v.code == code) return true;
  return false;
}

std::string view_bytes(SnapshotView v) {
  v.created_at = 0;
  return v.serialize();
}

}  // namespace

TEST_CASE("ids, head, and emptiness") {
  StoryPrototype p;
  CHECK(p.empty());
  CHECK(p.head_chapter() == -1);
  CHECK(p.add_character("Ava", {{"occupation", "detective"}}, 0) == "c1");
  CHECK(p.add_character("Brek", {}, 0) == "c2");
  CHECK(p.add_scene("harbor", "night", "", 0) == "s1");
  CHECK_FALSE(p.empty());
  CHECK(p.head_chapter() == -1);
  p.snapshot_chapter(0);
  CHECK(p.head_chapter() == 0);
  CHECK(p.find_character_by_name("Ava")->id == "c1");
  CHECK(p.find_character("c3") == nullptr);
}

TEST_CASE("add_character preconditions") {
  StoryPrototype p;
  p.add_character("Ava", {}, 0);
  CHECK(thrown([&] { p.add_character("Ava", {}, 0); }) == Errc::duplicate_name);
  CHECK(thrown([&] { p.add_character("", {}, 0); }) == Errc::precondition_failed);
  CHECK(thrown([&] { p.add_character("Cyr", {}, 1); }) == Errc::invalid_chapter);
  CHECK(thrown([&] { p.add_character("Cyr", {}, -1); }) == Errc::invalid_chapter);
}

TEST_CASE("relationship versioning") {
  StoryPrototype p;
  auto c1 = p.add_character("Ava", {}, 0);
  auto c2 = p.add_character("Brek", {}, 0);
  p.snapshot_chapter(0);

  CHECK(thrown([&] {
          p.upsert_relationship("c9", c2, "romantic", 0.3, Direction::mutual, 1);
        }) == Errc::unknown_character);
  CHECK(thrown([&] {
          p.upsert_relationship(c1, c2, "romantic", 1.3, Direction::mutual, 1);
        }) == Errc::strength_out_of_range);
  CHECK(thrown([&] {
          p.upsert_relationship(c1, c1, "romantic", 0.3, Direction::mutual, 1);
        }) == Errc::precondition_failed);
  CHECK(thrown([&] {
          p.upsert_relationship(c1, c2, "sworn", 0.3, Direction::mutual, 1);
        }) == Errc::precondition_failed);

  p.upsert_relationship(c1, c2, "romantic", 0.3, Direction::mutual, 1);
  p.upsert_relationship(c1, c2, "romantic", 0.7, Direction::mutual, 3);
  CHECK(thrown([&] {
          p.upsert_relationship(c1, c2, "romantic", 0.5, Direction::mutual, 3);
        }) == Errc::non_monotone_chapter);
  p.upsert_relationship(c1, c2, "other:debt", 0.9, Direction::directed, 1);

  auto hist = p.relationship_history(c1, c2);
  REQUIRE(hist.size() == 3);
  CHECK(hist[0].kind == "other:debt");
  CHECK(hist[1].chapter == 1);
  CHECK(hist[2].chapter == 3);

  CHECK(p.relationship_at(c1, c2, "romantic", 2)->strength == doctest::Approx(0.3));
  CHECK(p.relationship_at(c1, c2, "romantic", 3)->strength == doctest::Approx(0.7));
  CHECK_FALSE(p.relationship_at(c1, c2, "romantic", 0).has_value());
  CHECK_FALSE(p.relationship_at(c2, c1, "romantic", 5).has_value());
}

TEST_CASE("add_event preconditions") {
  StoryPrototype p;
  auto c1 = p.add_character("Ava", {}, 0);
  auto s1 = p.add_scene("harbor", "night", "", 0);
  CHECK(thrown([&] {
          p.add_event(0, "x", {}, {{c1, "calm", 0.0}}, "s9");
        }) == Errc::unknown_scene);
  CHECK(thrown([&] { p.add_event(0, "x", {}, {}, s1); }) == Errc::empty_participants);
  CHECK(thrown([&] {
          p.add_event(0, "x", {}, {{"c9", "calm", 0.0}}, s1);
        }) == Errc::unknown_character);
  CHECK(thrown([&] {
          p.add_event(0, "x", {}, {{c1, "", 0.0}}, s1);
        }) == Errc::precondition_failed);
  CHECK(thrown([&] {
          p.add_event(0, "x", {}, {{c1, "calm", 1.5}}, s1);
        }) == Errc::precondition_failed);
  CHECK(p.add_event(0, "x", {}, {{c1, "calm", -1.0}}, s1) == "e1");
}

TEST_CASE("snapshot ordering") {
  StoryPrototype p;
  CHECK(thrown([&] { p.snapshot_chapter(1); }) == Errc::out_of_order_snapshot);
  p.snapshot_chapter(0);
  CHECK(thrown([&] { p.snapshot_chapter(0); }) == Errc::out_of_order_snapshot);
  p.snapshot_chapter(1);
  CHECK(p.head_chapter() == 1);
  CHECK(thrown([&] { p.add_character("Ava", {}, 5); }) == Errc::invalid_chapter);
  CHECK(thrown([&] { p.snapshot_view(2); }) == Errc::invalid_chapter);
}

TEST_CASE("snapshots are immutable under later mutation") {
  StoryPrototype p = sample_proto();
  const std::string before = p.snapshot_view(0).serialize();

  auto c3 = p.add_character("Cyr", {}, 1);
  auto s2 = p.add_scene("warehouse", "day", "", 1);
  p.add_event(1, "break-in", {}, {{c3, "thrill", 0.8}}, s2);
  p.upsert_relationship(c3, "c1", "rivalry", 0.6, Direction::directed, 1);
  p.snapshot_chapter(1);

  CHECK(p.snapshot_view(0).serialize() == before);
  SnapshotView v0 = p.snapshot_view(0);
  SnapshotView v1 = p.snapshot_view(1);
  CHECK(v0.events.size() == 1);
  CHECK(v1.events.size() == 2);
  CHECK(v0.characters.size() == 2);
  CHECK(v1.characters.size() == 3);
}

TEST_CASE("limited view hides foreign participation detail") {
  StoryPrototype p = sample_proto();
  LimitedView ava = p.limited_view("c1", 0);
  LimitedView brek = p.limited_view("c2", 0);

  REQUIRE(ava.events.size() == 1);
  REQUIRE(brek.events.size() == 1);
  CHECK(ava.events[0].own.emotional_impact == "wary");
  CHECK(brek.events[0].own.emotional_impact == "eager");
  CHECK(ava.events[0].co_participants == std::vector<std::string>{"c2"});
  CHECK(brek.events[0].co_participants == std::vector<std::string>{"c1"});

  const std::string ava_dump = oracle::lv_json(ava).dump();
  CHECK(ava_dump.find("eager") == std::string::npos);
  CHECK(ava_dump.find("wary") != std::string::npos);

  CHECK(ava.relationships.size() == 1);
  CHECK(ava.meta.long_term_goal == "Expose the smuggling ring.");

  CHECK(thrown([&] { p.limited_view("c9", 0); }) == Errc::unknown_character);
  CHECK(thrown([&] { p.limited_view("c1", 4); }) == Errc::invalid_chapter);

  p.add_character("Cyr", {}, 1);
  p.snapshot_chapter(1);
  CHECK(thrown([&] { p.limited_view("c3", 0); }) == Errc::unknown_character);
  CHECK(p.limited_view("c3", 1).events.empty());
}

TEST_CASE("fuzzed logs: views match the deep-copy oracle") {
  for (std::uint32_t seed = 1; seed <= 40; ++seed) {
    oracle::Fuzzer fuzz(seed);
    const bool backdate = seed > 20;
    auto log = fuzz.make_log(80, backdate);

    StoryPrototype p;
    oracle::Shadow shadow;
    for (const auto& m : log) {
      oracle::apply(p, m);
      shadow.apply(m);
    }
    REQUIRE(p.head_chapter() == shadow.head);
    CHECK(p.validate().empty());
    CHECK(oracle::shadow_well_formed(shadow));

    for (int k = 0; k <= p.head_chapter(); ++k) {
      SnapshotView real = p.snapshot_view(k);
      SnapshotView want = shadow.view(k, real.created_at);
      CHECK(real.serialize() == want.serialize());
    }
  }
}

TEST_CASE("fuzzed logs: limited views match brute force and stay contained") {
  for (std::uint32_t seed = 50; seed <= 70; ++seed) {
    oracle::Fuzzer fuzz(seed);
    auto log = fuzz.make_log(60, seed % 2 == 0);
    StoryPrototype p;
    oracle::Shadow shadow;
    for (const auto& m : log) {
      oracle::apply(p, m);
      shadow.apply(m);
    }
    for (int k = 0; k <= p.head_chapter(); ++k) {
      SnapshotView snap = p.snapshot_view(k);
      for (const auto& c : snap.characters) {
        LimitedView got = p.limited_view(c.id, k);
        CHECK(oracle::lv_json(got) == oracle::lv_json(shadow.limited(c.id, k)));
        for (const auto& r : got.relationships) {
          CHECK((r.src == c.id || r.dst == c.id));
        }
        for (const auto& e : got.events) {
          CHECK(e.own.character == c.id);
          for (const auto& co : e.co_participants) CHECK(co != c.id);
          bool in_snap = false;
          for (const auto& se : snap.events)
            if (se.id == e.id) in_snap = true;
          CHECK(in_snap);
        }
      }
    }
  }
}

TEST_CASE("fuzzed logs: history, point query, and plot chain match brute force") {
  for (std::uint32_t seed = 80; seed <= 92; ++seed) {
    oracle::Fuzzer fuzz(seed);
    auto log = fuzz.make_log(70, seed % 2 == 0);
    StoryPrototype p;
    oracle::Shadow shadow;
    for (const auto& m : log) {
      oracle::apply(p, m);
      shadow.apply(m);
    }

    for (const auto& a : shadow.characters) {
      for (const auto& b : shadow.characters) {
        auto got = p.relationship_history(a.id, b.id);
        std::vector<RelationshipVersion> want;
        for (const auto& r : shadow.relationships)
          if (r.src == a.id && r.dst == b.id) want.push_back(r);
        std::stable_sort(want.begin(), want.end(), [](const auto& x, const auto& y) {
          return x.kind != y.kind ? x.kind < y.kind : x.chapter < y.chapter;
        });
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
          CHECK(got[i].kind == want[i].kind);
          CHECK(got[i].chapter == want[i].chapter);
          CHECK(got[i].strength == want[i].strength);
        }
        for (int ch = 0; ch <= p.head_chapter() + 2; ++ch) {
          auto at = p.relationship_at(a.id, b.id, "romantic", ch);
          const RelationshipVersion* expect = nullptr;
          for (const auto& r : shadow.relationships)
            if (r.src == a.id && r.dst == b.id && r.kind == "romantic" &&
                r.chapter <= ch && (!expect || r.chapter > expect->chapter))
              expect = &r;
          CHECK(at.has_value() == (expect != nullptr));
          if (at && expect) CHECK(at->strength == expect->strength);
        }
      }
    }

    for (int from = 0; from <= p.head_chapter(); ++from) {
      for (int to = from; to <= p.head_chapter(); ++to) {
        auto got = p.plot_chain(from, to);
        std::vector<EventNode> want;
        for (const auto& e : shadow.events)
          if (e.chapter >= from && e.chapter <= to) want.push_back(e);
        std::stable_sort(want.begin(), want.end(),
                         [](const auto& x, const auto& y) { return x.chapter < y.chapter; });
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].id == want[i].id);
      }
    }
    CHECK(thrown([&] { p.plot_chain(0, p.head_chapter() + 1); }) == Errc::invalid_range);
    CHECK(thrown([&] { p.plot_chain(2, 1); }) == Errc::invalid_range);
  }
}

TEST_CASE("validate flags hand-corrupted graphs") {
  const StoryPrototype base = sample_proto();
  CHECK(base.validate().empty());

  auto corrupt = [&](auto edit) {
    auto doc = nlohmann::ordered_json::parse(base.serialize());
    edit(doc);
    return StoryPrototype::deserialize(doc.dump());
  };

  auto r1 = corrupt([](auto& d) { d["events"][0]["scene"] = "s9"; }).validate();
  CHECK(has_code(r1, "DanglingScene"));

  auto r2 = corrupt([](auto& d) { d["characters"][1]["name"] = "Ava"; }).validate();
  CHECK(has_code(r2, "DuplicateName"));

  auto r3 = corrupt([](auto& d) { d["relationships"][0]["strength"] = 1.5; }).validate();
  CHECK(has_code(r3, "StrengthOutOfRange"));

  auto r4 = corrupt([](auto& d) {
              d["events"][0]["participants"][0]["character"] = "c9";
            }).validate();
  CHECK(has_code(r4, "DanglingParticipant"));

  auto r5 = corrupt([](auto& d) { d["snapshots"][0]["chapter"] = 3; }).validate();
  CHECK_FALSE(r5.empty());

  auto r6 = corrupt([](auto& d) {
              d["relationships"].push_back(d["relationships"][0]);
            }).validate();
  CHECK(has_code(r6, "NonMonotoneVersion"));

  auto r7 = corrupt([](auto& d) { d["snapshots"] = nlohmann::ordered_json::array(); })
                .validate();
  CHECK(has_code(r7, "MissingSnapshot"));
}

TEST_CASE("serialize round trip preserves the graph and id stability") {
  for (std::uint32_t seed = 100; seed <= 110; ++seed) {
    oracle::Fuzzer fuzz(seed);
    auto log = fuzz.make_log(50, seed % 2 == 0);
    StoryPrototype p;
    for (const auto& m : log) oracle::apply(p, m);

    StoryPrototype q = StoryPrototype::deserialize(p.serialize());
    CHECK(graph_equal(p, q));
    CHECK(q.head_chapter() == p.head_chapter());

    auto id_p = p.add_character("late joiner", {}, p.head_chapter());
    auto id_q = q.add_character("late joiner", {}, q.head_chapter());
    CHECK(id_p == id_q);
  }
}

TEST_CASE("deserialize rejects junk") {
  CHECK(thrown([] { StoryPrototype::deserialize("not a document"); }) ==
        Errc::corrupt_document);
  CHECK(thrown([] { StoryPrototype::deserialize("[1,2]"); }) == Errc::corrupt_document);

  auto doc = nlohmann::ordered_json::parse(sample_proto().serialize());
  doc["format_version"] = 2;
  CHECK(thrown([&] { StoryPrototype::deserialize(doc.dump()); }) ==
        Errc::unsupported_version);

  doc["format_version"] = 1;
  doc.erase("characters");
  CHECK(thrown([&] { StoryPrototype::deserialize(doc.dump()); }) ==
        Errc::corrupt_document);
}

TEST_CASE("label-filtered replay reconstructs every snapshot") {
  for (std::uint32_t seed = 120; seed <= 140; ++seed) {
    oracle::Fuzzer fuzz(seed);
    auto log = fuzz.make_log(80, false);  // workflow discipline: labels track head+1
    StoryPrototype full;
    for (const auto& m : log) oracle::apply(full, m);

    for (int k = 0; k <= full.head_chapter(); ++k) {
      StoryPrototype rebuilt;
      for (const auto& m : log)
        if (oracle::mutation_label(m) <= k) oracle::apply(rebuilt, m);
      REQUIRE(rebuilt.head_chapter() == k);
      CHECK(view_bytes(rebuilt.snapshot_view(k)) == view_bytes(full.snapshot_view(k)));
    }
  }
}
