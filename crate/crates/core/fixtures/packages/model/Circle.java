package model;

public class Circle extends Shape {
    private final double r;

    public Circle(double r) { this.r = r; }

    public double area() { return 3.14 * r * r; }
}
