package app;

import java.util.List;
import lib.Util;
import model.*;

public class Main {
    List<String> names;

    public static void main(String[] args) {
        Shape s = new Circle(2.0);
        s.area();
        s.describe();
        Util.log("start");
        Runnable r = new Runnable() {
            public void run() {
                helper();
            }
        };
        r.run();
        names.forEach(n -> helper());
        for (Shape each : shapes()) {
            each.area();
        }
    }

    static List<Shape> shapes() { return null; }

    static void helper() {}
}
