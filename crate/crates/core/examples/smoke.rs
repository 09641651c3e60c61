use b3pc::oracle;
use b3pc::proto::{Kind, PluSpec};
use b3pc::ring::RingParams;
use b3pc::sim::{simulate_signed, FullSeeds, SimConfig};

fn check(cfg: &SimConfig, kind: &Kind, inputs: &[Vec<i128>], expect: &[Vec<i128>]) {
    let out = simulate_signed(cfg, kind, inputs, None).unwrap();
    assert_eq!(out, expect, "{} mismatch", kind.name());
    println!("{}: ok ({} instances)", kind.name(), inputs.len());
}

fn main() {
    let params = RingParams::new(24, 4, 2).unwrap();
    let cfg = SimConfig::new(params, FullSeeds::from_master(b"sweep"));
    let xs: Vec<i128> = (-15..16).collect();

    let single: Vec<Vec<i128>> = xs.iter().map(|&x| vec![x]).collect();
    check(&cfg, &Kind::DRelu, &single, &xs.iter().map(|&x| vec![oracle::drelu(x)]).collect::<Vec<_>>());
    check(&cfg, &Kind::Relu, &single, &xs.iter().map(|&x| vec![oracle::relu(x)]).collect::<Vec<_>>());
    check(&cfg, &Kind::Abs, &single, &xs.iter().map(|&x| vec![oracle::abs(x)]).collect::<Vec<_>>());
    let p24 = RingParams::new(24, 4, 2).unwrap();
    let dyn_kind = Kind::DynRelu { alpha0: p24.encode_signed(3).unwrap(), alpha1: p24.encode_signed(-2).unwrap() };
    check(&cfg, &dyn_kind, &single, &xs.iter().map(|&x| vec![oracle::dynamic_relu(3, -2, x)]).collect::<Vec<_>>());
    let funnel = Kind::FunnelRelu { scale: p24.encode_signed(-1).unwrap(), offset: p24.encode_signed(2).unwrap() };
    // difference x - T(x) must stay in the ellx domain
    let fx: Vec<Vec<i128>> = (-6..8).map(|x| vec![x]).collect();
    check(&cfg, &funnel, &fx, &fx.iter().map(|v| vec![oracle::funnel_relu(-1, 2, v[0])]).collect::<Vec<_>>());

    let mut pairs = vec![];
    for x in -7i128..8 { for y in -7i128..8 { pairs.push(vec![x, y]); } }
    check(&cfg, &Kind::Equality, &pairs, &pairs.iter().map(|p| vec![oracle::equality(p[0], p[1])]).collect::<Vec<_>>());
    check(&cfg, &Kind::Max2, &pairs, &pairs.iter().map(|p| vec![oracle::max2(p[0], p[1])]).collect::<Vec<_>>());
    check(&cfg, &Kind::Min2, &pairs, &pairs.iter().map(|p| vec![oracle::min2(p[0], p[1])]).collect::<Vec<_>>());
    check(&cfg, &Kind::UCmp, &pairs, &pairs.iter().map(|p| vec![oracle::cmp(p[0], p[1])]).collect::<Vec<_>>());

    // relu6 on a wider ring so breakpoints fit
    let p32 = RingParams::new(32, 6, 3).unwrap();
    let cfg32 = SimConfig::new(p32, FullSeeds::from_master(b"sweep32"));
    let spec = PluSpec::relu6(&p32, p32.encode_signed(6).unwrap());
    let xs6: Vec<Vec<i128>> = (-15..16).map(|x| vec![x]).collect();
    check(&cfg32, &Kind::Plu { spec }, &xs6, &xs6.iter().map(|v| vec![oracle::relu6(6, v[0])]).collect::<Vec<_>>());

    let mut triples = vec![];
    for x in -3i128..4 { for y in -3i128..4 { for z in -3i128..4 { triples.push(vec![x, y, z]); } } }
    check(&cfg, &Kind::MaxN, &triples, &triples.iter().map(|t| vec![oracle::max_n(t)]).collect::<Vec<_>>());
    check(&cfg, &Kind::MinN, &triples, &triples.iter().map(|t| vec![oracle::min_n(t)]).collect::<Vec<_>>());
    check(&cfg, &Kind::MedN, &triples, &triples.iter().map(|t| vec![oracle::median_n(t)]).collect::<Vec<_>>());
    check(&cfg, &Kind::Sort { descending: true }, &triples, &triples.iter().map(|t| oracle::sort_n(t, true)).collect::<Vec<_>>());
    check(&cfg, &Kind::Sort { descending: false }, &triples, &triples.iter().map(|t| oracle::sort_n(t, false)).collect::<Vec<_>>());

    check(&cfg, &Kind::RssDRelu, &single, &xs.iter().map(|&x| vec![oracle::drelu(x)]).collect::<Vec<_>>());
    check(&cfg, &Kind::RssRelu, &single, &xs.iter().map(|&x| vec![oracle::relu(x)]).collect::<Vec<_>>());
    println!("all ok");
}
