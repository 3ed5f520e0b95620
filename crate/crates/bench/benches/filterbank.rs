use criterion::{black_box, criterion_group, criterion_main, Criterion};
use filterbank_core::design::{self, BandwidthRule, DesignRequest, FilterbankDesign};
use filterbank_core::gammatone::{self, make_filter, measure_bandwidth};
use filterbank_core::scales::erbs_numeric;
use filterbank_core::signals::{mix, HarmonicSpeaker};
use filterbank_core::{ErbModel, FrequencyHz, ScaleFunction};

fn log_request(n_bands: usize) -> DesignRequest {
    DesignRequest::new(
        FrequencyHz(200.0),
        FrequencyHz(3600.0),
        n_bands,
        ScaleFunction::log_default(),
        BandwidthRule::ConstantQ {
            eta_b: gammatone::gammatone_q_factor(4, 7.7).unwrap(),
        },
    )
    .unwrap()
}

fn bench_design(c: &mut Criterion) {
    let req = log_request(64);
    c.bench_function("build_log_design_64", |b| {
        b.iter(|| FilterbankDesign::build(black_box(&req)))
    });
    let rule = BandwidthRule::ErbScaled {
        k: gammatone::k_of_n(4).unwrap(),
        erb: ErbModel::GLASBERG_MOORE,
    };
    c.bench_function("solve_n_bands_linear_erb", |b| {
        b.iter(|| design::solve_n_bands(FrequencyHz(200.0), FrequencyHz(3600.0), black_box(1.0), &rule))
    });
    c.bench_function("erbs_numeric_linear", |b| {
        b.iter(|| {
            erbs_numeric(
                &ErbModel::GLASBERG_MOORE,
                black_box(FrequencyHz(8000.0)),
                FrequencyHz(0.0),
            )
        })
    });
}

fn bench_gammatone(c: &mut Criterion) {
    let filter = make_filter(4, FrequencyHz(2000.0), &ErbModel::GLASBERG_MOORE, 32000.0).unwrap();
    c.bench_function("measure_bandwidth_2k", |b| {
        b.iter(|| measure_bandwidth(black_box(&filter)))
    });

    let design = FilterbankDesign::build(&log_request(24)).unwrap();
    let speakers = [
        HarmonicSpeaker::uniform(110.0, 10, 0.1),
        HarmonicSpeaker::uniform(150.0, 10, 0.1),
    ];
    let signal = mix(&speakers, 0.5, 16000.0).unwrap();
    c.bench_function("apply_filterbank_24_bands_500ms", |b| {
        b.iter(|| gammatone::apply_filterbank(black_box(&design), 4, &signal))
    });
}

criterion_group!(benches, bench_design, bench_gammatone);
criterion_main!(benches);
