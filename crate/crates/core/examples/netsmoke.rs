use b3pc::config::SessionConfig;
use b3pc::net::{serve_party, Client};
use b3pc::proto::Kind;
use std::net::TcpListener;

fn main() {
    let mut cfg = SessionConfig::loopback(40, 16, b"netsmoke", 0);
    // bind ephemeral ports first, then fix the config
    let listeners: Vec<TcpListener> = (0..3)
        .map(|_| TcpListener::bind("127.0.0.1:0").unwrap())
        .collect();
    for (i, l) in listeners.iter().enumerate() {
        cfg.parties[i].port = l.local_addr().unwrap().port();
    }
    for (i, l) in listeners.into_iter().enumerate() {
        let cfg = cfg.clone();
        std::thread::spawn(move || serve_party(&cfg, i as u8, l).unwrap());
    }
    let mut client = Client::connect(&cfg).unwrap();
    let params = cfg.params().unwrap();
    let enc = |v: i128| params.encode_input(v).unwrap();
    let out = client.run(&Kind::Relu, &[vec![enc(22)], vec![enc(-22)], vec![enc(7)]]).unwrap();
    println!("relu: {:?}", out.outputs);
    println!("relu meter 02 bits: {}", out.meter.bits(b3pc::transport::Dir::C02));
    let out = client.run(&Kind::MaxN, &[vec![enc(12), enc(46), enc(31), enc(27)]]).unwrap();
    println!("max4: {:?}", out.outputs);
    // second batch reuses the session with advanced instance ids
    let out = client.run(&Kind::Relu, &[vec![enc(-5)]]).unwrap();
    println!("relu2: {:?}", out.outputs);
    client.bye();
    println!("net ok");
}
