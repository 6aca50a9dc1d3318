#![no_main]

use libfuzzer_sys::fuzz_target;
use memrep::io::{read_trajectory, write_trajectory};

fuzz_target!(|data: &[u8]| {
    if let Ok(traj) = read_trajectory(data) {
        let mut out = Vec::new();
        write_trajectory(&mut out, &traj).expect("writing a parsed trajectory");
        assert_eq!(read_trajectory(out.as_slice()).expect("round trip").len(), traj.len());
    }
});
