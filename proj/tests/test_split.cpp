#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "rca/split.hpp"

using namespace rca;

namespace {

Dataset fake_dataset(std::size_t n) {
    // split_dataset only touches ids and labels.
    Dataset ds;
    ds.schema.push_back(FeatureSchema{"x", FeatureKind::numerical, "", "x is {value}", {}, "x is unknown"});
    for (std::size_t i = 0; i < n; ++i) {
        PatientRecord rec;
        rec.id = "r" + std::to_string(i);
        rec.label = i % 7 == 0 ? 1 : 0;
        rec.values.push_back(CellValue::make_numeric(1.0, "1"));
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

void check_partition(const Dataset& ds, const DatasetSplit& split) {
    std::set<std::string> all;
    for (const auto& rec : ds.records) all.insert(rec.id);
    std::set<std::string> seen;
    std::size_t total = 0;
    for (const auto* part : {&split.train_ids, &split.val_ids, &split.test_ids}) {
        for (const auto& id : *part) {
            CHECK(all.count(id) == 1);
            CHECK(seen.insert(id).second);  // pairwise disjoint
            ++total;
        }
    }
    CHECK(total == all.size());  // union covers everything
}

}  // namespace

TEST_CASE("3:1:1 sizes for the published dataset shapes") {
    CHECK(split_sizes(315) == std::tuple<std::size_t, std::size_t, std::size_t>{189, 63, 63});
    CHECK(split_sizes(415) == std::tuple<std::size_t, std::size_t, std::size_t>{249, 83, 83});
    CHECK(split_sizes(965) == std::tuple<std::size_t, std::size_t, std::size_t>{579, 193, 193});
    CHECK(split_sizes(5) == std::tuple<std::size_t, std::size_t, std::size_t>{3, 1, 1});
}

TEST_CASE("split respects the size rule on real data") {
    LoadResult lr = test::load_synthetic_shape("crt");
    DatasetSplit split = split_dataset(lr.dataset, 42);
    CHECK(split.train_ids.size() == 189);
    CHECK(split.val_ids.size() == 63);
    CHECK(split.test_ids.size() == 63);
    check_partition(lr.dataset, split);
}

TEST_CASE("split rejects tiny datasets") {
    Dataset ds = fake_dataset(4);
    CHECK_THROWS_AS(split_dataset(ds, 1), std::runtime_error);
    CHECK_NOTHROW(split_dataset(fake_dataset(5), 1));
}

TEST_CASE("same (dataset, seed) gives byte-identical splits") {
    Dataset ds = fake_dataset(101);
    DatasetSplit a = split_dataset(ds, 9001);
    DatasetSplit b = split_dataset(ds, 9001);
    CHECK(a.train_ids == b.train_ids);
    CHECK(a.val_ids == b.val_ids);
    CHECK(a.test_ids == b.test_ids);

    DatasetSplit c = split_dataset(ds, 9002);
    CHECK(a.train_ids != c.train_ids);
}

TEST_CASE("partition property over random sizes and seeds") {
    SplitMix64 rng(123);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 5 + rng.bounded(400);
        std::uint64_t seed = rng.next();
        Dataset ds = fake_dataset(n);
        DatasetSplit split = split_dataset(ds, seed);
        auto [train_n, val_n, test_n] = split_sizes(n);
        CHECK(split.train_ids.size() == train_n);
        CHECK(split.val_ids.size() == val_n);
        CHECK(split.test_ids.size() == test_n);
        check_partition(ds, split);
    }
}

TEST_CASE("stratified mode still partitions") {
    LoadResult lr = test::load_synthetic_shape("crt");
    DatasetSplit split = split_dataset(lr.dataset, 7, /*stratified=*/true);
    check_partition(lr.dataset, split);
    // 32 positives -> per-class floor rule puts 19 in train, 6 in val, 7 in test.
    auto count_pos = [&](const std::vector<std::string>& ids) {
        std::size_t n = 0;
        for (const auto& id : ids)
            if (lr.dataset.record_by_id(id).label == 1) ++n;
        return n;
    };
    CHECK(count_pos(split.train_ids) == 19);
    CHECK(count_pos(split.val_ids) == 6);
    CHECK(count_pos(split.test_ids) == 7);
}
