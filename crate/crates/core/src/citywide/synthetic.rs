use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mortality::{simulate_mortality, MortalityModel};
use crate::des::{derive_seed, StrategyProfile};
use crate::scenario::{
    generate_synthetic_patients, Action, ArrivalProfile, HospitalSpec, Location, PatientRecord, Scenario, ServiceModel,
    SimOptions, SpatialSampler, TravelModel,
};
use crate::stochastic::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCityOptions {
    pub hospitals: usize,
    pub horizon: f64,
    /// Offered load per server.
    pub load: f64,
    pub records: usize,
    /// Replications behind the observed mortality vector.
    pub replications: usize,
    /// Index of the hospital whose action the sweep holds fixed.
    pub fixed_hospital: usize,
}

impl Default for SyntheticCityOptions {
    fn default() -> Self {
        Self {
            hospitals: 10,
            horizon: 1000.0,
            load: 0.9,
            records: 4000,
            replications: 10,
            fixed_hospital: 5,
        }
    }
}

/// A generated city together with the strategy profile that produced its
/// "observed" mortality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCity {
    pub scenario: Scenario,
    pub records: Vec<PatientRecord>,
    /// Id of the nearest hospital per record.
    pub assignments: Vec<usize>,
    pub true_profile: StrategyProfile,
    pub observed: Vec<(usize, f64)>,
    pub fixed: (usize, Action),
}

/// Hospitals on a jittered two-row grid 5 km apart, one to three servers
/// each, and demand clustered around each hospital in proportion to its
/// servers. The true profile is drawn at random.
pub fn synthetic_city(seed: u64, opts: &SyntheticCityOptions, model: &MortalityModel) -> SyntheticCity {
    let k = opts.hospitals;
    assert!(
        k >= 3 && opts.fixed_hospital < k,
        "need at least three hospitals and a valid fixed index"
    );
    let mut rng = stream_rng(seed, 0, None, Stream::Custom(0x5c17));
    let cols = k.div_ceil(2);
    let mut hospitals = Vec::with_capacity(k);
    for j in 0..k {
        let (r, c) = (j / cols, j % cols);
        let x = 5.0 * c as f64 + rng.random_range(-1.0..1.0);
        let y = 5.0 * r as f64 + rng.random_range(-1.0..1.0);
        hospitals.push(HospitalSpec {
            id: j,
            location: Location::Plane([x, y]),
            servers: rng.random_range(1..=3),
            queue_buffer: Some(rng.random_range(0..=1)),
            service: ServiceModel::Exponential { rate: 1.0 },
            strategy: Action::Accept,
        });
    }
    let total_servers: u32 = hospitals.iter().map(|h| h.servers).sum();
    let mut points = Vec::with_capacity(20 * total_servers as usize);
    for h in &hospitals {
        let Location::Plane([hx, hy]) = h.location else {
            unreachable!()
        };
        for _ in 0..20 * h.servers {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            points.push([hx + 2.0 * dx, hy + 2.0 * dy]);
        }
    }
    let true_profile = StrategyProfile::new(
        (0..k)
            .map(|_| {
                if rng.random::<bool>() {
                    Action::Redirect
                } else {
                    Action::Accept
                }
            })
            .collect(),
    );
    let mut scenario = Scenario {
        horizon: opts.horizon,
        warmup: None,
        arrivals: ArrivalProfile {
            rate: opts.load * total_servers as f64,
            hourly_scale: None,
            spatial: SpatialSampler::Empirical {
                file: None,
                points,
                nodes: Vec::new(),
            },
        },
        travel: TravelModel::Euclidean { velocity: 40.0 },
        hospitals,
        options: SimOptions::default(),
    };
    scenario.validate().expect("generated scenario is valid");
    let records = generate_synthetic_patients(&scenario, opts.records, seed);
    let assignments = records
        .iter()
        .map(|r| r.nearest_hospital.expect("generator sets it"))
        .collect();
    let seeds: Vec<u64> = (0..opts.replications as u64)
        .map(|r| derive_seed(seed, r, 0x0b5))
        .collect();
    let observed = simulate_mortality(&scenario, &true_profile, model, &seeds)
        .into_iter()
        .enumerate()
        .filter_map(|(j, m)| m.map(|m| (j, m)))
        .collect();
    let fixed = (opts.fixed_hospital, true_profile.action(opts.fixed_hospital));
    SyntheticCity {
        scenario,
        records,
        assignments,
        true_profile,
        observed,
        fixed,
    }
}
