#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "gridscope/ingest.hpp"
#include "helpers.hpp"

using namespace gridscope;
using namespace gridtest;

TEST_CASE("filename parsing", "[ingest]") {
  CHECK(frame_time_from_filename("snapshot_1000.jsonl") == 1000);
  CHECK(frame_time_from_filename("/a/b/snapshot_0.jsonl") == 0);
  CHECK_THROWS_AS(frame_time_from_filename("foo.jsonl"), BadFilename);
  CHECK_THROWS_AS(frame_time_from_filename("snapshot_.jsonl"), BadFilename);
  CHECK_THROWS_AS(frame_time_from_filename("snapshot_12a.jsonl"), BadFilename);
  CHECK_THROWS_AS(frame_time_from_filename("snapshot_123.json"), BadFilename);
}

TEST_CASE("empty snapshot file yields empty frame", "[ingest]") {
  TempDir tmp;
  write_raw(tmp.path, "snapshot_1000.jsonl", "");
  SnapshotFrame f = parse_snapshot_file(tmp.path / "snapshot_1000.jsonl");
  CHECK(f.frame_time == 1000);
  CHECK(f.ads.empty());
}

TEST_CASE("valid line maps every attribute", "[ingest]") {
  TempDir tmp;
  AdSpec spec;
  spec.mct = 1000;
  spec.dst = 400;
  write_snapshot(tmp.path, 1000, {make_ad(spec)});
  IngestReport rep;
  SnapshotFrame f = parse_snapshot_file(tmp.path / "snapshot_1000.jsonl", &rep);
  REQUIRE(f.ads.size() == 1);
  const PilotAd& ad = f.ads[0];
  CHECK(ad.name == spec.name);
  CHECK(ad.state == AdState::Claimed);
  CHECK(ad.activity == "Busy");
  CHECK(ad.my_current_time == 1000);
  CHECK(ad.daemon_start_time == 400);
  CHECK(ad.to_retire == spec.to_retire);
  CHECK(ad.to_die == spec.to_die);
  CHECK(ad.site == "SiteA");
  CHECK(ad.entry_name == "entry_a");
  CHECK(ad.resource_name == "res_a");
  CHECK(ad.site_wms_job_id == "1234.0");
  CHECK(rep.lines == 1);
  CHECK(rep.ads == 1);
  CHECK(rep.malformed.empty());
}

TEST_CASE("ad json round trip", "[ingest]") {
  AdSpec spec;
  spec.state = "Retiring";
  spec.activity = "Retiring";
  spec.run = 1234;
  PilotAd ad = make_ad(spec);
  PilotAd back = ad_from_json(nlohmann::json::parse(ad_to_jsonl(ad)));
  CHECK(back.name == ad.name);
  CHECK(back.state == ad.state);
  CHECK(back.activity == ad.activity);
  CHECK(back.my_current_time == ad.my_current_time);
  CHECK(back.total_job_run_time == ad.total_job_run_time);
  CHECK(back.daemon_start_time == ad.daemon_start_time);
  CHECK(back.to_retire == ad.to_retire);
  CHECK(back.to_die == ad.to_die);
  CHECK(back.site == ad.site);
  CHECK(back.entry_name == ad.entry_name);
  CHECK(back.resource_name == ad.resource_name);
  CHECK(back.site_wms_job_id == ad.site_wms_job_id);
}

TEST_CASE("unknown startd state survives round trip", "[ingest]") {
  AdSpec spec;
  spec.state = "Matched";
  PilotAd ad = make_ad(spec);
  CHECK(ad.state == AdState::Other);
  PilotAd back = ad_from_json(nlohmann::json::parse(ad_to_jsonl(ad)));
  CHECK(back.state_raw == "Matched");
}

TEST_CASE("boundary violations are quarantined with reasons", "[ingest]") {
  TempDir tmp;

  SECTION("to_die before to_retire") {
    AdSpec spec;
    spec.to_retire = 83000;
    spec.to_die = 55000;
    write_snapshot(tmp.path, 1000, {make_ad(spec)});
    IngestReport rep;
    SnapshotFrame f = parse_snapshot_file(tmp.path / "snapshot_1000.jsonl", &rep);
    CHECK(f.ads.empty());
    REQUIRE(rep.malformed.size() == 1);
    CHECK(rep.malformed[0].line_no == 1);
    CHECK(rep.malformed[0].reason.find("to_retire") != std::string::npos);
  }

  SECTION("daemon start after current time") {
    AdSpec spec;
    spec.dst = 2000;
    spec.mct = 1000;
    write_snapshot(tmp.path, 1000, {make_ad(spec)});
    IngestReport rep;
    SnapshotFrame f = parse_snapshot_file(tmp.path / "snapshot_1000.jsonl", &rep);
    CHECK(f.ads.empty());
    REQUIRE(rep.malformed.size() == 1);
    CHECK(rep.malformed[0].reason.find("DaemonStartTime") != std::string::npos);
  }

  SECTION("empty job id") {
    AdSpec spec;
    spec.job = "";
    write_snapshot(tmp.path, 1000, {make_ad(spec)});
    IngestReport rep;
    parse_snapshot_file(tmp.path / "snapshot_1000.jsonl", &rep);
    REQUIRE(rep.malformed.size() == 1);
    CHECK(rep.malformed[0].reason.find("SITEWMS_JobId") != std::string::npos);
  }

  SECTION("clock skew beyond tolerance") {
    AdSpec spec;
    spec.mct = 1400;  // frame at 1000, default tolerance 300
    write_snapshot(tmp.path, 1000, {make_ad(spec)});
    IngestReport rep;
    parse_snapshot_file(tmp.path / "snapshot_1000.jsonl", &rep);
    REQUIRE(rep.malformed.size() == 1);
    CHECK(rep.malformed[0].reason.find("400") != std::string::npos);
  }
}

TEST_CASE("missing attribute and broken json are quarantined", "[ingest]") {
  TempDir tmp;
  nlohmann::json j = ad_to_json(make_ad(AdSpec{}));
  j.erase("GLIDEIN_ToDie");
  std::string good = ad_to_jsonl(make_ad(AdSpec{}));
  write_raw(tmp.path, "snapshot_1000.jsonl",
            good + "\n" + j.dump() + "\n" + "{not json\n");
  IngestReport rep;
  SnapshotFrame f = parse_snapshot_file(tmp.path / "snapshot_1000.jsonl", &rep);
  CHECK(f.ads.size() == 1);
  REQUIRE(rep.malformed.size() == 2);
  CHECK(rep.malformed[0].line_no == 2);
  CHECK(rep.malformed[0].reason.find("GLIDEIN_ToDie") != std::string::npos);
  CHECK(rep.malformed[1].line_no == 3);
  CHECK(rep.malformed[1].reason.find("JSON") != std::string::npos);
  CHECK(rep.lines == 3);
  CHECK(rep.ads == 1);
}

TEST_CASE("duplicate key in one frame throws", "[ingest]") {
  TempDir tmp;
  AdSpec a;
  AdSpec b;
  b.name = "glidein_2@node2";  // same job id + entry, different startd name
  write_snapshot(tmp.path, 1000, {make_ad(a), make_ad(b)});
  CHECK_THROWS_AS(parse_snapshot_file(tmp.path / "snapshot_1000.jsonl"),
                  DuplicateKeyInFrame);
}

TEST_CASE("same job id on different entries is not a duplicate", "[ingest]") {
  TempDir tmp;
  AdSpec a;
  AdSpec b;
  b.name = "glidein_2@node2";
  b.entry = "entry_b";
  write_snapshot(tmp.path, 1000, {make_ad(a), make_ad(b)});
  SnapshotFrame f = parse_snapshot_file(tmp.path / "snapshot_1000.jsonl");
  CHECK(f.ads.size() == 2);
}

TEST_CASE("directory loading orders frames and reports gaps", "[ingest]") {
  TempDir tmp;
  AdSpec spec;

  SECTION("consecutive frames, no gaps") {
    for (std::int64_t t : {120, 60, 180}) {  // written out of order on purpose
      spec.mct = t;
      spec.dst = 10;
      write_snapshot(tmp.path, t, {make_ad(spec)});
    }
    IngestReport rep;
    auto frames = load_snapshot_dir(tmp.path, &rep);
    REQUIRE(frames.size() == 3);
    CHECK(frames[0].frame_time == 60);
    CHECK(frames[1].frame_time == 120);
    CHECK(frames[2].frame_time == 180);
    CHECK(rep.gaps.empty());
  }

  SECTION("gap above tolerance is reported") {
    for (std::int64_t t : {60, 600}) {
      spec.mct = t;
      spec.dst = 10;
      write_snapshot(tmp.path, t, {make_ad(spec)});
    }
    IngestReport rep;
    auto frames = load_snapshot_dir(tmp.path, &rep);
    CHECK(frames.size() == 2);
    REQUIRE(rep.gaps.size() == 1);
    CHECK(rep.gaps[0].from_time == 60);
    CHECK(rep.gaps[0].to_time == 600);
    CHECK(rep.gaps[0].length() == 540);
  }

  SECTION("non-snapshot files are ignored") {
    spec.mct = 60;
    spec.dst = 10;
    write_snapshot(tmp.path, 60, {make_ad(spec)});
    write_raw(tmp.path, "truth.csv", "a,b\n1,2\n");
    write_raw(tmp.path, "notes.txt", "hello");
    auto frames = load_snapshot_dir(tmp.path);
    CHECK(frames.size() == 1);
  }
}

TEST_CASE("duplicate timestamps across files throw", "[ingest]") {
  TempDir tmp;
  AdSpec spec;
  spec.mct = 60;
  spec.dst = 10;
  write_snapshot(tmp.path, 60, {make_ad(spec)});
  write_raw(tmp.path, "snapshot_060.jsonl", "");  // same t=60, distinct file
  CHECK_THROWS_AS(load_snapshot_dir(tmp.path), NonMonotoneTimestamps);
}

TEST_CASE("empty or missing directory throws", "[ingest]") {
  TempDir tmp;
  CHECK_THROWS_AS(load_snapshot_dir(tmp.path), EmptyDirectory);
  CHECK_THROWS_AS(load_snapshot_dir(tmp.path / "nope"), EmptyDirectory);
}

TEST_CASE("streaming and bulk loading agree", "[ingest]") {
  TempDir tmp;
  AdSpec spec;
  for (std::int64_t t : {60, 120, 180, 240}) {
    spec.mct = t;
    spec.dst = 10;
    spec.name = "glidein_" + std::to_string(t);
    write_snapshot(tmp.path, t, {make_ad(spec)});
  }
  auto frames = load_snapshot_dir(tmp.path);
  std::size_t streamed = 0;
  std::size_t ads = 0;
  for_each_snapshot_frame(tmp.path, [&](SnapshotFrame&& f) {
    CHECK(f.frame_time == frames[streamed].frame_time);
    ads += f.ads.size();
    ++streamed;
  });
  CHECK(streamed == frames.size());
  CHECK(ads == 4);
}
