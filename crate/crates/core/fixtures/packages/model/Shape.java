package model;

public abstract class Shape {
    public abstract double area();

    public void describe() {
        System.out.println(area());
    }
}
