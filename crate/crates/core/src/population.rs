//! Bundled coarse population grid and default cloud-site locations.
//!
//! Each populated cell is a 2 x 2 degree box centered on a metropolitan area,
//! weighted by its approximate metro population in millions.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geo::GroundPoint;
use crate::ConfigError;

/// Half-width (degrees) of a bundled cell.
const CELL_HALF_DEG: f64 = 1.0;

/// (name, latitude, longitude, metro population in millions)
pub const METRO_AREAS: &[(&str, f64, f64, f64)] = &[
    // East Asia
    ("Tokyo", 35.68, 139.69, 37.4),
    ("Osaka", 34.69, 135.50, 19.1),
    ("Nagoya", 35.18, 136.91, 9.5),
    ("Fukuoka", 33.59, 130.40, 5.5),
    ("Sapporo", 43.06, 141.35, 2.6),
    ("Seoul", 37.57, 126.98, 25.5),
    ("Busan", 35.18, 129.08, 7.8),
    ("Shanghai", 31.23, 121.47, 28.5),
    ("Beijing", 39.90, 116.41, 21.3),
    ("Chongqing", 29.56, 106.55, 16.4),
    ("Guangzhou", 23.13, 113.26, 18.7),
    ("Shenzhen", 22.54, 114.06, 17.6),
    ("Tianjin", 39.34, 117.36, 13.9),
    ("Chengdu", 30.57, 104.07, 16.0),
    ("Wuhan", 30.59, 114.31, 11.1),
    ("Xi'an", 34.34, 108.94, 12.9),
    ("Hangzhou", 30.27, 120.16, 12.2),
    ("Nanjing", 32.06, 118.80, 9.3),
    ("Shenyang", 41.81, 123.43, 9.1),
    ("Harbin", 45.80, 126.53, 10.0),
    ("Zhengzhou", 34.75, 113.63, 12.6),
    ("Changsha", 28.23, 112.94, 10.0),
    ("Kunming", 25.04, 102.71, 8.5),
    ("Jinan", 36.65, 117.12, 9.2),
    ("Qingdao", 36.07, 120.38, 10.1),
    ("Dalian", 38.91, 121.61, 7.5),
    ("Xiamen", 24.48, 118.09, 5.2),
    ("Fuzhou", 26.07, 119.30, 8.3),
    ("Nanning", 22.82, 108.32, 8.7),
    ("Urumqi", 43.83, 87.62, 4.1),
    ("Lanzhou", 36.06, 103.83, 4.4),
    ("Taiyuan", 37.87, 112.55, 5.3),
    ("Hefei", 31.82, 117.23, 9.4),
    ("Nanchang", 28.68, 115.86, 6.4),
    ("Changchun", 43.82, 125.32, 9.1),
    ("Shijiazhuang", 38.04, 114.51, 11.2),
    ("Hong Kong", 22.32, 114.17, 7.5),
    ("Taipei", 25.03, 121.57, 7.0),
    ("Kaohsiung", 22.63, 120.30, 2.8),
    ("Ulaanbaatar", 47.89, 106.91, 1.6),
    ("Pyongyang", 39.04, 125.76, 3.1),
    // South-East Asia and Oceania
    ("Jakarta", -6.21, 106.85, 33.4),
    ("Surabaya", -7.26, 112.75, 9.9),
    ("Bandung", -6.92, 107.62, 8.6),
    ("Medan", 3.60, 98.67, 4.7),
    ("Manila", 14.60, 120.98, 24.0),
    ("Cebu", 10.32, 123.89, 3.0),
    ("Davao", 7.19, 125.46, 1.9),
    ("Bangkok", 13.76, 100.50, 17.1),
    ("Ho Chi Minh City", 10.82, 106.63, 13.3),
    ("Hanoi", 21.03, 105.85, 8.4),
    ("Kuala Lumpur", 3.139, 101.69, 8.4),
    ("Singapore", 1.35, 103.82, 5.9),
    ("Yangon", 16.87, 96.20, 5.6),
    ("Phnom Penh", 11.56, 104.92, 2.3),
    ("Sydney", -33.87, 151.21, 5.3),
    ("Melbourne", -37.81, 144.96, 5.1),
    ("Brisbane", -27.47, 153.03, 2.6),
    ("Perth", -31.95, 115.86, 2.1),
    ("Adelaide", -34.93, 138.60, 1.4),
    ("Auckland", -36.85, 174.76, 1.7),
    ("Port Moresby", -9.44, 147.18, 0.4),
    // South Asia
    ("Delhi", 28.70, 77.10, 32.9),
    ("Mumbai", 19.08, 72.88, 21.3),
    ("Kolkata", 22.57, 88.36, 15.3),
    ("Bangalore", 12.97, 77.59, 13.6),
    ("Chennai", 13.08, 80.27, 11.8),
    ("Hyderabad", 17.39, 78.49, 10.8),
    ("Ahmedabad", 23.02, 72.57, 8.7),
    ("Pune", 18.52, 73.86, 7.2),
    ("Surat", 21.17, 72.83, 7.8),
    ("Jaipur", 26.91, 75.79, 4.3),
    ("Lucknow", 26.85, 80.95, 3.9),
    ("Kanpur", 26.45, 80.33, 3.2),
    ("Nagpur", 21.15, 79.09, 3.0),
    ("Patna", 25.59, 85.14, 2.6),
    ("Indore", 22.72, 75.86, 3.3),
    ("Bhopal", 23.26, 77.41, 2.5),
    ("Kochi", 9.93, 76.27, 2.4),
    ("Dhaka", 23.81, 90.41, 23.2),
    ("Chittagong", 22.36, 91.78, 5.4),
    ("Karachi", 24.86, 67.01, 17.2),
    ("Lahore", 31.55, 74.34, 13.9),
    ("Faisalabad", 31.42, 73.08, 3.7),
    ("Islamabad", 33.68, 73.05, 2.6),
    ("Kabul", 34.56, 69.21, 4.6),
    ("Kathmandu", 27.72, 85.32, 1.6),
    ("Colombo", 6.93, 79.86, 2.4),
    // Middle East and Central Asia
    ("Tehran", 35.69, 51.39, 9.5),
    ("Mashhad", 36.30, 59.61, 3.4),
    ("Isfahan", 32.65, 51.67, 2.3),
    ("Baghdad", 33.32, 44.36, 7.7),
    ("Riyadh", 24.71, 46.68, 7.7),
    ("Jeddah", 21.49, 39.19, 4.9),
    ("Dubai", 25.20, 55.27, 3.6),
    ("Kuwait City", 29.38, 47.99, 3.3),
    ("Doha", 25.29, 51.53, 2.4),
    ("Amman", 31.95, 35.93, 2.2),
    ("Tel Aviv", 32.09, 34.78, 4.4),
    ("Damascus", 33.51, 36.28, 2.6),
    ("Beirut", 33.89, 35.50, 2.4),
    ("Sana'a", 15.37, 44.19, 3.3),
    ("Istanbul", 41.01, 28.98, 15.8),
    ("Ankara", 39.93, 32.86, 5.3),
    ("Izmir", 38.42, 27.14, 3.1),
    ("Tashkent", 41.30, 69.24, 2.9),
    ("Almaty", 43.24, 76.89, 2.2),
    ("Baku", 40.41, 49.87, 2.4),
    // Europe
    ("Moscow", 55.76, 37.62, 12.6),
    ("Saint Petersburg", 59.93, 30.34, 5.6),
    ("Novosibirsk", 55.01, 82.93, 1.6),
    ("Yekaterinburg", 56.84, 60.61, 1.5),
    ("Kazan", 55.80, 49.11, 1.3),
    ("London", 51.51, -0.13, 14.3),
    ("Manchester", 53.48, -2.24, 2.8),
    ("Birmingham", 52.49, -1.89, 2.9),
    ("Glasgow", 55.86, -4.25, 1.8),
    ("Dublin", 53.35, -6.26, 2.0),
    ("Paris", 48.86, 2.35, 11.2),
    ("Lyon", 45.76, 4.84, 2.3),
    ("Marseille", 43.30, 5.37, 1.9),
    ("Madrid", 40.42, -3.70, 6.8),
    ("Barcelona", 41.39, 2.17, 5.6),
    ("Valencia", 39.47, -0.38, 1.6),
    ("Seville", 37.39, -5.98, 1.5),
    ("Lisbon", 38.72, -9.14, 2.9),
    ("Porto", 41.16, -8.63, 1.7),
    ("Rome", 41.90, 12.50, 4.3),
    ("Milan", 45.46, 9.19, 4.3),
    ("Naples", 40.85, 14.27, 3.1),
    ("Berlin", 52.52, 13.40, 4.7),
    ("Hamburg", 53.55, 9.99, 3.2),
    ("Munich", 48.14, 11.58, 2.9),
    ("Frankfurt", 50.11, 8.68, 2.7),
    ("Ruhr", 51.45, 7.01, 5.1),
    ("Stuttgart", 48.78, 9.18, 2.7),
    ("Amsterdam", 52.37, 4.90, 2.5),
    ("Rotterdam", 51.92, 4.48, 1.8),
    ("Brussels", 50.85, 4.35, 2.1),
    ("Zurich", 47.38, 8.54, 1.4),
    ("Vienna", 48.21, 16.37, 2.9),
    ("Prague", 50.08, 14.44, 2.7),
    ("Warsaw", 52.23, 21.01, 3.1),
    ("Krakow", 50.06, 19.94, 1.5),
    ("Budapest", 47.50, 19.04, 3.0),
    ("Bucharest", 44.43, 26.10, 2.2),
    ("Sofia", 42.70, 23.32, 1.7),
    ("Belgrade", 44.79, 20.45, 1.7),
    ("Athens", 37.98, 23.73, 3.6),
    ("Copenhagen", 55.68, 12.57, 2.1),
    ("Stockholm", 59.33, 18.07, 2.4),
    ("Oslo", 59.91, 10.75, 1.6),
    ("Helsinki", 60.17, 24.94, 1.5),
    ("Kyiv", 50.45, 30.52, 3.5),
    ("Kharkiv", 49.99, 36.23, 1.7),
    ("Minsk", 53.90, 27.57, 2.0),
    // Africa
    ("Lagos", 6.52, 3.38, 15.9),
    ("Kano", 12.00, 8.52, 4.4),
    ("Ibadan", 7.38, 3.94, 3.8),
    ("Abuja", 9.08, 7.40, 3.8),
    ("Cairo", 30.04, 31.24, 22.2),
    ("Alexandria", 31.20, 29.92, 5.6),
    ("Kinshasa", -4.44, 15.27, 16.3),
    ("Lubumbashi", -11.66, 27.48, 2.7),
    ("Luanda", -8.84, 13.23, 9.3),
    ("Johannesburg", -26.20, 28.05, 10.1),
    ("Cape Town", -33.92, 18.42, 4.8),
    ("Durban", -29.86, 31.02, 3.2),
    ("Nairobi", -1.29, 36.82, 5.3),
    ("Dar es Salaam", -6.79, 39.21, 7.8),
    ("Addis Ababa", 9.03, 38.74, 5.5),
    ("Khartoum", 15.50, 32.56, 6.3),
    ("Kampala", 0.35, 32.58, 3.8),
    ("Abidjan", 5.36, -4.01, 5.9),
    ("Accra", 5.60, -0.19, 2.7),
    ("Kumasi", 6.69, -1.62, 3.7),
    ("Dakar", 14.72, -17.47, 3.4),
    ("Bamako", 12.64, -8.00, 3.0),
    ("Ouagadougou", 12.37, -1.52, 3.2),
    ("Douala", 4.05, 9.77, 4.1),
    ("Yaounde", 3.87, 11.52, 4.5),
    ("Casablanca", 33.57, -7.59, 4.3),
    ("Algiers", 36.75, 3.06, 3.0),
    ("Tunis", 36.81, 10.18, 2.4),
    ("Antananarivo", -18.88, 47.51, 3.9),
    ("Lusaka", -15.39, 28.32, 3.2),
    ("Harare", -17.83, 31.05, 2.2),
    ("Maputo", -25.97, 32.57, 1.9),
    ("Mogadishu", 2.05, 45.32, 2.6),
    // North America
    ("New York", 40.71, -74.01, 19.6),
    ("Los Angeles", 34.05, -118.24, 12.9),
    ("Chicago", 41.88, -87.63, 9.4),
    ("Dallas", 32.78, -96.80, 7.9),
    ("Houston", 29.76, -95.37, 7.3),
    ("Washington", 38.91, -77.04, 6.3),
    ("Philadelphia", 39.95, -75.17, 6.2),
    ("Miami", 25.76, -80.19, 6.1),
    ("Atlanta", 33.75, -84.39, 6.2),
    ("Boston", 42.36, -71.06, 4.9),
    ("Phoenix", 33.45, -112.07, 5.0),
    ("San Francisco", 37.77, -122.42, 4.6),
    ("Seattle", 47.61, -122.33, 4.0),
    ("Detroit", 42.33, -83.05, 4.3),
    ("Minneapolis", 44.98, -93.27, 3.7),
    ("San Diego", 32.72, -117.16, 3.3),
    ("Denver", 39.74, -104.99, 3.0),
    ("St. Louis", 38.63, -90.20, 2.8),
    ("Charlotte", 35.23, -80.84, 2.7),
    ("Portland", 45.52, -122.68, 2.5),
    ("Kansas City", 39.10, -94.58, 2.2),
    ("Salt Lake City", 40.76, -111.89, 1.3),
    ("Toronto", 43.65, -79.38, 6.7),
    ("Montreal", 45.50, -73.57, 4.3),
    ("Vancouver", 49.28, -123.12, 2.7),
    ("Calgary", 51.05, -114.07, 1.6),
    ("Mexico City", 19.43, -99.13, 22.3),
    ("Guadalajara", 20.66, -103.35, 5.3),
    ("Monterrey", 25.69, -100.32, 5.3),
    ("Puebla", 19.04, -98.21, 3.2),
    ("Tijuana", 32.51, -117.04, 2.2),
    ("Guatemala City", 14.63, -90.51, 3.1),
    ("Havana", 23.11, -82.37, 2.1),
    ("Santo Domingo", 18.49, -69.93, 3.5),
    ("San Juan", 18.47, -66.11, 2.4),
    // South America
    ("Sao Paulo", -23.55, -46.63, 22.4),
    ("Rio de Janeiro", -22.91, -43.17, 13.6),
    ("Belo Horizonte", -19.92, -43.94, 6.2),
    ("Brasilia", -15.79, -47.88, 4.8),
    ("Porto Alegre", -30.03, -51.23, 4.1),
    ("Recife", -8.05, -34.88, 4.2),
    ("Fortaleza", -3.73, -38.53, 4.1),
    ("Salvador", -12.97, -38.50, 3.9),
    ("Curitiba", -25.43, -49.27, 3.7),
    ("Manaus", -3.12, -60.02, 2.3),
    ("Buenos Aires", -34.60, -58.38, 15.5),
    ("Cordoba", -31.42, -64.18, 1.6),
    ("Lima", -12.05, -77.04, 11.0),
    ("Bogota", 4.71, -74.07, 11.3),
    ("Medellin", 6.24, -75.58, 4.1),
    ("Cali", 3.45, -76.53, 2.8),
    ("Santiago", -33.45, -70.67, 6.9),
    ("Caracas", 10.48, -66.90, 2.9),
    ("Maracaibo", 10.64, -71.64, 2.4),
    ("Quito", -0.18, -78.47, 2.0),
    ("Guayaquil", -2.17, -79.92, 3.1),
    ("La Paz", -16.49, -68.12, 1.9),
    ("Asuncion", -25.26, -57.58, 3.5),
    ("Montevideo", -34.90, -56.16, 1.8),
];

/// (name, latitude, longitude) of the default terrestrial relay sites.
pub const CLOUD_SITES: &[(&str, f64, f64)] = &[
    ("Ashburn", 39.04, -77.49),
    ("Columbus", 39.96, -83.00),
    ("San Jose", 37.34, -121.89),
    ("Boardman", 45.84, -119.70),
    ("Montreal", 45.50, -73.57),
    ("Sao Paulo", -23.55, -46.63),
    ("Dublin", 53.35, -6.26),
    ("London", 51.51, -0.13),
    ("Frankfurt", 50.11, 8.68),
    ("Paris", 48.86, 2.35),
    ("Stockholm", 59.33, 18.07),
    ("Bahrain", 26.07, 50.56),
    ("Cape Town", -33.92, 18.42),
    ("Mumbai", 19.08, 72.88),
    ("Singapore", 1.35, 103.82),
    ("Jakarta", -6.21, 106.85),
    ("Hong Kong", 22.32, 114.17),
    ("Seoul", 37.57, 126.98),
    ("Tokyo", 35.68, 139.69),
    ("Sydney", -33.87, 151.21),
];

/// A latitude/longitude box with a sampling weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationCell {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub weight: f64,
}

impl PopulationCell {
    pub fn contains(&self, p: &GroundPoint) -> bool {
        (self.lat_min..=self.lat_max).contains(&p.latitude)
            && (self.lon_min..=self.lon_max).contains(&p.longitude)
    }
}

/// Cells with weights normalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationModel {
    cells: Vec<PopulationCell>,
}

impl PopulationModel {
    pub fn new(mut cells: Vec<PopulationCell>) -> Result<Self, ConfigError> {
        if cells
            .iter()
            .any(|c| !(c.weight >= 0.0) || !c.weight.is_finite())
        {
            return Err(ConfigError::Invalid(
                "population weights must be finite and non-negative",
            ));
        }
        if cells
            .iter()
            .any(|c| !(c.lat_min <= c.lat_max && c.lon_min <= c.lon_max))
        {
            return Err(ConfigError::Invalid("population cell bounds are inverted"));
        }
        let total: f64 = cells.iter().map(|c| c.weight).sum();
        if !cells.is_empty() {
            if total <= 0.0 {
                return Err(ConfigError::Invalid("population weights sum to zero"));
            }
            for c in &mut cells {
                c.weight /= total;
            }
        }
        Ok(Self { cells })
    }

    /// The bundled metro-area grid.
    pub fn bundled() -> Self {
        let cells = METRO_AREAS
            .iter()
            .map(|&(_, lat, lon, pop)| PopulationCell {
                lat_min: (lat - CELL_HALF_DEG).max(-90.0),
                lat_max: (lat + CELL_HALF_DEG).min(90.0),
                lon_min: (lon - CELL_HALF_DEG).max(-180.0),
                lon_max: (lon + CELL_HALF_DEG).min(179.999_999),
                weight: pop,
            })
            .collect();
        Self::new(cells).expect("bundled grid is valid")
    }

    pub fn cells(&self) -> &[PopulationCell] {
        &self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Default terrestrial relay site locations.
pub fn default_cloud_sites() -> Vec<GroundPoint> {
    CLOUD_SITES
        .iter()
        .map(|&(_, lat, lon)| GroundPoint::new(lat, lon))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_is_normalized() {
        let m = PopulationModel::bundled();
        assert!(m.cells().len() >= 200);
        let s: f64 = m.cells().iter().map(|c| c.weight).sum();
        assert!((s - 1.0).abs() < 1e-12);
        for (_, lat, lon, _) in METRO_AREAS {
            assert!(GroundPoint::new(*lat, *lon).is_valid());
        }
    }

    #[test]
    fn rejects_negative_weight() {
        let c = PopulationCell {
            lat_min: 0.0,
            lat_max: 1.0,
            lon_min: 0.0,
            lon_max: 1.0,
            weight: -1.0,
        };
        assert!(PopulationModel::new(alloc::vec![c]).is_err());
    }

    #[test]
    fn twenty_cloud_sites() {
        assert_eq!(default_cloud_sites().len(), 20);
    }
}
