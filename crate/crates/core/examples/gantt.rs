use schedsim_core::{render_gantt, run_omdrrs, run_rr, Workload};

fn main() {
    let w = Workload::from_bursts(&[16, 13, 15, 10, 12, 22, 8, 24, 26, 25]).unwrap();
    print!("{}", render_gantt(&run_omdrrs(&w, 5, 2).unwrap(), 100));
    print!("{}", render_gantt(&run_rr(&w, 5).unwrap(), 100));
    let w = Workload::from_bursts(&[15, 20, 7, 30, 4]).unwrap();
    print!("{}", render_gantt(&run_omdrrs(&w, 6, 2).unwrap(), 60));
}
