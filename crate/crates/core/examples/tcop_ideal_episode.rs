//! Cost of operation of the reference trip: 2200 m at a constant 22 m/s.

use truck_tactics::reward::{energy_step, ideal_revenue, ideal_trip_cost, TcopParams, IDEAL_DISTANCE, IDEAL_SPEED, PROFIT_MARGIN};

fn main() {
    let p = TcopParams::default();
    let duration = IDEAL_DISTANCE / IDEAL_SPEED;
    let kwh = energy_step(IDEAL_SPEED, 0.0, duration, &p);
    let (energy, driver) = ideal_trip_cost(&p);
    println!("trip: {IDEAL_DISTANCE} m in {duration} s");
    println!("energy        {kwh:.4} kWh = {energy:.4} EUR");
    println!("driver        {driver:.4} EUR");
    println!("tcop          {:.4} EUR", energy + driver);
    println!("revenue (+{:.0}%) {:.4} EUR", PROFIT_MARGIN * 100.0, ideal_revenue(&p, PROFIT_MARGIN));

    // what the same trip costs at other cruise speeds
    for v in [15.0, 18.0, 22.0, 25.0] {
        let t = IDEAL_DISTANCE / v;
        let e = p.electricity_price * energy_step(v, 0.0, t, &p);
        let d = p.driver_wage * t / 3600.0;
        println!("  {v:>4} m/s: energy {e:.3}  driver {d:.3}  total {:.3}", e + d);
    }
}
