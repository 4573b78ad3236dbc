use protodesign::baseline::{egf_filter, martin_filter, ofdp_filter, EgfConfig};
use protodesign::designer::{tabulated, Preset};
use protodesign::exec::Execution;
use protodesign::transmux::{
    ber_sim, ber_sim_with, empirical_sir, ChannelConfig, ChannelModel, TransmuxConfig, DEFAULT_SYMBOL_CAP,
};
use protodesign::PrototypeFilter;
use statrs::function::erf::erfc;

fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn channel(model: ChannelModel, ebn0_db: Vec<f64>, seed: u64) -> ChannelConfig {
    ChannelConfig { model, ebn0_db, trials: 16, seed, max_symbols: DEFAULT_SYMBOL_CAP }
}

fn acceptance_filters() -> Vec<PrototypeFilter> {
    vec![
        tabulated(Preset::TypeI).unwrap().filter,
        tabulated(Preset::TypeII).unwrap().filter,
        tabulated(Preset::TypeIII).unwrap().filter,
        martin_filter(4, 32).unwrap(),
        ofdp_filter(4, 32).unwrap(),
        egf_filter(&EgfConfig::new(1.0, 32), 4, 32).unwrap(),
    ]
}

#[test]
fn awgn_bpsk_matches_q_function() {
    let cfg = TransmuxConfig::new(martin_filter(4, 32).unwrap(), 256, 2, 5).unwrap();
    let point = ber_sim(&cfg, &channel(ChannelModel::Awgn, vec![8.0], 21)).unwrap()[0];
    let oracle = q_function((2.0 * 10f64.powf(0.8)).sqrt());
    assert!((oracle - 1.909e-4).abs() < 1e-6);
    let se = (oracle * (1.0 - oracle) / point.n_bits as f64).sqrt();
    assert!(point.n_errors >= 100);
    assert!((point.ber - oracle).abs() <= 3.0 * se, "{} vs {oracle} (se {se})", point.ber);
}

#[test]
fn rayleigh_bpsk_matches_closed_form() {
    let cfg = TransmuxConfig::new(tabulated(Preset::TypeII).unwrap().filter, 128, 2, 5).unwrap();
    let point = ber_sim(&cfg, &channel(ChannelModel::FlatRayleighPerSubcarrier, vec![10.0], 3)).unwrap()[0];
    let g: f64 = 10.0;
    let oracle = 0.5 * (1.0 - (g / (1.0 + g)).sqrt());
    // fading draws are shared by a whole frame, so allow a wider window
    assert!(((point.ber - oracle) / oracle).abs() < 0.15, "{} vs {oracle}", point.ber);
}

#[test]
fn noiseless_loopback_is_error_free_for_every_filter() {
    for f in acceptance_filters() {
        let label = f.label().to_string();
        let cfg = TransmuxConfig::new(f, 128, 2, 9).unwrap();
        let r = ber_sim(&cfg, &channel(ChannelModel::None, vec![0.0], 1)).unwrap();
        assert_eq!(r[0].n_errors, 0, "{label}");
    }
}

#[test]
fn empirical_sir_tracks_analytic_sir() {
    for f in acceptance_filters() {
        let analytic = protodesign::interference::analytic_sir(f.samples(), 32);
        let label = f.label().to_string();
        let cfg = TransmuxConfig::new(f, 256, 2, 13).unwrap();
        let measured = empirical_sir(&cfg, 16).unwrap();
        assert!((measured - analytic).abs() <= 0.5, "{label}: {measured} vs {analytic}");
    }
}

#[test]
fn ber_is_reproducible_and_thread_independent() {
    let cfg = TransmuxConfig::new(martin_filter(4, 32).unwrap(), 64, 4, 2).unwrap();
    let ch = ChannelConfig { max_symbols: 200_000, ..channel(ChannelModel::Awgn, vec![6.0, 10.0], 77) };
    let a = ber_sim_with(&cfg, &ch, Execution::Sequential).unwrap();
    let b = ber_sim_with(&cfg, &ch, Execution::Parallel).unwrap();
    let c = ber_sim(&cfg, &ch).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn configuration_errors() {
    let f = martin_filter(4, 32).unwrap();
    assert!(TransmuxConfig::new(f.clone(), 64, 3, 0).is_err());
    let cfg = TransmuxConfig::new(f, 64, 2, 0).unwrap();
    assert!(ber_sim(&cfg, &ChannelConfig { trials: 0, ..channel(ChannelModel::Awgn, vec![0.0], 0) }).is_err());
}
